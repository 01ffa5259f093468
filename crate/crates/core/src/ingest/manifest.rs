//! Bulk-archive manifests: which archive holds which paper.
//!
//! Two encodings are accepted. The XML form follows the shape of the arXiv
//! bulk source index, with explicit member lists:
//!
//! ```xml
//! <arXivSRC>
//!   <file>
//!     <filename>src/arXiv_src_2301_001.tar</filename>
//!     <paper>2301.00001</paper>
//!     <paper>2301.00002</paper>
//!   </file>
//! </arXivSRC>
//! ```
//!
//! The JSON form is `{"entries": [{"archive_id": "...", "paper_ids": [...]}]}`
//! or the bare `entries` array.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("reading manifest: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest JSON line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("manifest XML line {line}, column {column}: {message}")]
    Xml { line: u32, column: u32, message: String },
    #[error("manifest {location}: {message}")]
    Invalid { location: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub archive_id: String,
    pub paper_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveManifest {
    pub entries: Vec<ArchiveEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonManifest {
    Wrapped { entries: Vec<ArchiveEntry> },
    Bare(Vec<ArchiveEntry>),
}

impl ArchiveManifest {
    /// Validates uniqueness of archive ids and of paper membership.
    pub fn new(entries: Vec<ArchiveEntry>) -> Result<Self, ManifestError> {
        Self::validated(entries, |i| format!("entry {}", i + 1))
    }

    fn validated(entries: Vec<ArchiveEntry>, locate: impl Fn(usize) -> String) -> Result<Self, ManifestError> {
        let mut archives: HashMap<&str, usize> = HashMap::new();
        let mut papers: HashMap<&str, &str> = HashMap::new();
        for (i, entry) in entries.iter().enumerate() {
            if entry.archive_id.trim().is_empty() {
                return Err(ManifestError::Invalid { location: locate(i), message: "empty archive id".into() });
            }
            if archives.insert(entry.archive_id.as_str(), i).is_some() {
                return Err(ManifestError::Invalid {
                    location: locate(i),
                    message: format!("duplicate archive id `{}`", entry.archive_id),
                });
            }
            for paper in &entry.paper_ids {
                if let Some(prev) = papers.insert(paper.as_str(), entry.archive_id.as_str()) {
                    return Err(ManifestError::Invalid {
                        location: locate(i),
                        message: format!("paper `{paper}` listed in both `{prev}` and `{}`", entry.archive_id),
                    });
                }
            }
        }
        Ok(ArchiveManifest { entries })
    }

    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let parsed: JsonManifest = serde_json::from_str(text).map_err(|e| ManifestError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let entries = match parsed {
            JsonManifest::Wrapped { entries } | JsonManifest::Bare(entries) => entries,
        };
        Self::new(entries)
    }

    pub fn from_xml(text: &str) -> Result<Self, ManifestError> {
        let doc = roxmltree::Document::parse(text).map_err(|e| {
            let pos = e.pos();
            ManifestError::Xml { line: pos.row, column: pos.col, message: e.to_string() }
        })?;
        let mut entries = Vec::new();
        let mut lines = Vec::new();
        for file in doc.root_element().children().filter(|n| n.has_tag_name("file")) {
            let pos = doc.text_pos_at(file.range().start);
            let archive_id = file
                .children()
                .find(|n| n.has_tag_name("filename"))
                .and_then(|n| n.text())
                .or_else(|| file.attribute("id"))
                .map(|s| s.trim().to_string())
                .ok_or_else(|| ManifestError::Xml {
                    line: pos.row,
                    column: pos.col,
                    message: "<file> without <filename>".into(),
                })?;
            let paper_ids = file
                .children()
                .filter(|n| n.has_tag_name("paper") || n.has_tag_name("item"))
                .filter_map(|n| n.text().map(str::trim).or_else(|| n.attribute("id")))
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            entries.push(ArchiveEntry { archive_id, paper_ids });
            lines.push(pos.row);
        }
        Self::validated(entries, |i| format!("line {}", lines[i]))
    }

    /// Picks the decoder by extension, falling back to sniffing the first
    /// non-blank byte.
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path)?;
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("xml") => Self::from_xml(&text),
            Some("json") => Self::from_json(&text),
            _ if text.trim_start().starts_with('<') => Self::from_xml(&text),
            _ => Self::from_json(&text),
        }
    }

    pub fn paper_count(&self) -> usize {
        self.entries.iter().map(|e| e.paper_ids.len()).sum()
    }
}
