use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::manifest::ArchiveManifest;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedArchive {
    pub archive_id: String,
    pub covered: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownloadPlan {
    pub archives: Vec<PlannedArchive>,
    /// Requested ids that no archive lists.
    pub unknown: Vec<String>,
}

impl DownloadPlan {
    pub fn covered_count(&self) -> usize {
        self.archives.iter().map(|a| a.covered.len()).sum()
    }
}

/// Every paper lives in exactly one archive, so the minimal cover is just the
/// set of archives holding at least one wanted id.
pub fn plan_downloads(manifest: &ArchiveManifest, wanted: &BTreeSet<String>) -> DownloadPlan {
    let index: HashMap<&str, &str> = manifest
        .entries
        .iter()
        .flat_map(|e| e.paper_ids.iter().map(move |p| (p.as_str(), e.archive_id.as_str())))
        .collect();

    let mut by_archive: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let mut unknown = Vec::new();
    for id in wanted {
        match index.get(id.as_str()) {
            Some(archive) => by_archive.entry(archive).or_default().push(id.clone()),
            None => unknown.push(id.clone()),
        }
    }
    if !unknown.is_empty() {
        log::warn!("{} requested ids are not in the manifest", unknown.len());
    }
    DownloadPlan {
        archives: by_archive
            .into_iter()
            .map(|(archive_id, covered)| PlannedArchive { archive_id: archive_id.to_string(), covered })
            .collect(),
        unknown,
    }
}

/// Reads a wanted-ids file: one id per line, `#` starts a comment line.
pub fn parse_wanted(text: &str) -> BTreeSet<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::manifest::ArchiveEntry;

    fn manifest() -> ArchiveManifest {
        ArchiveManifest::new(vec![
            ArchiveEntry { archive_id: "A2".into(), paper_ids: vec!["p3".into()] },
            ArchiveEntry { archive_id: "A1".into(), paper_ids: vec!["p1".into(), "p2".into()] },
        ])
        .unwrap()
    }

    #[test]
    fn direct_cover() {
        let plan = plan_downloads(&manifest(), &BTreeSet::from(["p1".to_string(), "p3".to_string()]));
        assert_eq!(
            plan.archives,
            vec![
                PlannedArchive { archive_id: "A1".into(), covered: vec!["p1".into()] },
                PlannedArchive { archive_id: "A2".into(), covered: vec!["p3".into()] },
            ]
        );
        assert!(plan.unknown.is_empty());
    }

    #[test]
    fn empty_request() {
        assert_eq!(plan_downloads(&manifest(), &BTreeSet::new()), DownloadPlan::default());
    }

    #[test]
    fn unknown_ids_reported() {
        let plan = plan_downloads(&manifest(), &BTreeSet::from(["p9".to_string(), "p2".to_string()]));
        assert_eq!(plan.unknown, vec!["p9"]);
        assert_eq!(plan.archives.len(), 1);
    }

    #[test]
    fn parse_wanted_file() {
        let w = parse_wanted("# ids\n2301.00001\n\n 2301.00002 \n");
        assert_eq!(w.len(), 2);
    }
}
