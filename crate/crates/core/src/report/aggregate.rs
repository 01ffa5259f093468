use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Finding, Method, Severity};

pub const TOP_DOMAINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub key: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub total: usize,
    pub papers_with_findings: usize,
    pub by_category: BTreeMap<String, usize>,
    pub by_severity: BTreeMap<Severity, usize>,
    pub by_method: BTreeMap<Method, usize>,
    /// Hosts of URL findings, most frequent first, ties by name.
    pub top_domains: Vec<CountRow>,
    /// Label combinations of EE findings, most frequent first.
    pub label_combinations: Vec<CountRow>,
    /// Hosts of every URL seen, flagged or not, when supplied by the caller.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url_census: Option<Vec<CountRow>>,
}

/// Sorted by count descending, then key.
pub fn ranked<'a>(keys: impl IntoIterator<Item = &'a str>, limit: Option<usize>) -> Vec<CountRow> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_default() += 1;
    }
    let mut rows: Vec<CountRow> = counts.into_iter().map(|(k, c)| CountRow { key: k.to_string(), count: c }).collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
    if let Some(n) = limit {
        rows.truncate(n);
    }
    rows
}

pub fn aggregate(findings: &[Finding]) -> AggregateStats {
    let mut by_category = BTreeMap::new();
    let mut by_severity: BTreeMap<Severity, usize> = Severity::ALL.iter().map(|s| (*s, 0)).collect();
    let mut by_method: BTreeMap<Method, usize> = [Method::PM, Method::EE, Method::LF].iter().map(|m| (*m, 0)).collect();
    let mut papers = BTreeSet::new();
    for f in findings {
        *by_category.entry(f.category.clone()).or_default() += 1;
        *by_severity.entry(f.severity).or_default() += 1;
        *by_method.entry(f.method).or_default() += 1;
        papers.insert(f.paper_id.as_str());
    }
    let combos: Vec<String> = findings.iter().filter_map(|f| f.labels.as_ref()).map(|l| l.combination_key()).collect();
    AggregateStats {
        total: findings.len(),
        papers_with_findings: papers.len(),
        by_category,
        by_severity,
        by_method,
        top_domains: ranked(findings.iter().filter_map(|f| f.host.as_deref()), Some(TOP_DOMAINS)),
        label_combinations: ranked(combos.iter().map(String::as_str), None),
        url_census: None,
    }
}

impl AggregateStats {
    pub fn with_url_census<'a>(mut self, hosts: impl IntoIterator<Item = &'a str>) -> Self {
        self.url_census = Some(ranked(hosts, Some(TOP_DOMAINS)));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{CategoryLabel, LabelSet};
    use crate::patterns::{Locus, Origin};
    use crate::report::SeverityMap;

    fn f(cat: &str, method: Method, host: Option<&str>, labels: Option<LabelSet>) -> Finding {
        let locus = Locus { paper_id: "p".into(), file: "f".into(), line: 1, origin: Origin::Comment };
        let mut x = Finding::new("p", method, cat, locus, "v", "r", &SeverityMap::default());
        x.host = host.map(str::to_string);
        x.labels = labels;
        x
    }

    #[test]
    fn histogram_and_partition() {
        let fs: Vec<Finding> = (0..3)
            .map(|_| f("pii-exposure", Method::EE, None, Some(LabelSet::new([CategoryLabel::Pii]))))
            .chain((0..2).map(|_| f("login-credentials", Method::PM, None, None)))
            .collect();
        let s = aggregate(&fs);
        assert_eq!(s.by_category["pii-exposure"], 3);
        assert_eq!(s.by_category["login-credentials"], 2);
        assert_eq!(s.by_severity.values().sum::<usize>(), 5);
        assert_eq!(s.by_method.values().sum::<usize>(), 5);
        assert_eq!(s.papers_with_findings, 1);
    }

    #[test]
    fn domains_and_combinations() {
        let mut fs = vec![f("token-like-url", Method::PM, Some("b.org"), None)];
        fs.extend((0..3).map(|_| f("token-like-url", Method::PM, Some("a.com"), None)));
        fs.push(f("pii-exposure", Method::EE, None, Some(LabelSet::new([CategoryLabel::Pii]))));
        fs.push(f("pii-exposure", Method::EE, None, Some(LabelSet::new([CategoryLabel::Pii]))));
        fs.push(f(
            "author-conflicts",
            Method::EE,
            None,
            Some(LabelSet::new([CategoryLabel::Peer, CategoryLabel::Conf])),
        ));
        let s = aggregate(&fs);
        assert_eq!(s.top_domains[0], CountRow { key: "a.com".into(), count: 3 });
        assert_eq!(
            s.label_combinations,
            vec![CountRow { key: "PII".into(), count: 2 }, CountRow { key: "CONF, PEER".into(), count: 1 }]
        );
    }
}
