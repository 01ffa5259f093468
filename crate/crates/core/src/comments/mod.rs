//! LaTeX comment extraction with file/line provenance, and detection of
//! papers that carry no usable comments.

mod lexer;

use std::borrow::Cow;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use lexer::{lex, CommentKind, Lexed, LexedComment, SplitSource, COMMENT_ENVIRONMENT, VERBATIM_ENVIRONMENTS};

use crate::clean::normalize;
use crate::ingest::{FileClass, SubmissionKind, SubmissionRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub paper_id: String,
    pub file: String,
    pub line: usize,
    pub col: usize,
    pub raw: String,
    pub kind: CommentKind,
}

/// Decodes file bytes as UTF-8, replacing invalid sequences. The flag
/// reports whether any replacement happened.
pub fn decode_source(bytes: &[u8]) -> (Cow<'_, str>, bool) {
    let text = String::from_utf8_lossy(bytes);
    let lossy = matches!(text, Cow::Owned(_));
    (text, lossy)
}

pub fn extract_comments(source: &str, file: &str, paper_id: &str) -> Vec<CommentRecord> {
    let lexed = lex(source);
    for w in &lexed.warnings {
        log::warn!("{paper_id}/{file}: {w}");
    }
    lexed
        .comments
        .iter()
        .map(|c| CommentRecord {
            paper_id: paper_id.to_string(),
            file: file.to_string(),
            line: c.line,
            col: c.col,
            raw: lexed.body(c).to_string(),
            kind: c.kind,
        })
        .collect()
}

/// Comments of every tex file in a submission, ordered by (file, line, col).
pub fn extract_submission_comments(record: &SubmissionRecord) -> Vec<CommentRecord> {
    let mut all: Vec<CommentRecord> = record
        .files_of(FileClass::Tex)
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|entry| {
            let path = record.absolute(entry);
            match std::fs::read(&path) {
                Ok(bytes) => {
                    let (text, lossy) = decode_source(&bytes);
                    if lossy {
                        log::warn!("{}/{}: not valid UTF-8, decoded lossily", record.paper_id, entry.path);
                    }
                    extract_comments(&text, &entry.path, &record.paper_id)
                }
                Err(e) => {
                    log::warn!("{}: {e}", path.display());
                    Vec::new()
                }
            }
        })
        .collect();
    all.sort_by(|a, b| (&a.file, a.line, a.col).cmp(&(&b.file, b.line, b.col)));
    all
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UsabilityStatus {
    HasComments,
    LatexNoComments,
    NoLatex,
    NoSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentUsability {
    pub paper_id: String,
    pub status: UsabilityStatus,
}

/// A comment counts only if something survives normalization; a file of bare
/// `%` lines reads as stripped.
pub fn assess_usability(record: &SubmissionRecord, comments: &[CommentRecord]) -> CommentUsability {
    let status = match record.kind {
        SubmissionKind::LatexSource => {
            if comments.iter().any(|c| !normalize(&c.raw).is_empty()) {
                UsabilityStatus::HasComments
            } else {
                UsabilityStatus::LatexNoComments
            }
        }
        _ if record.files.is_empty() => UsabilityStatus::NoSource,
        _ => UsabilityStatus::NoLatex,
    };
    CommentUsability { paper_id: record.paper_id.clone(), status }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UsabilitySummary {
    pub total: usize,
    pub counts: BTreeMap<UsabilityStatus, usize>,
    pub ratios: BTreeMap<UsabilityStatus, f64>,
    /// Share of papers in any status other than `has-comments`.
    pub without_usable_ratio: f64,
}

impl UsabilitySummary {
    pub fn from_statuses<'a>(items: impl IntoIterator<Item = &'a CommentUsability>) -> Self {
        let mut counts: BTreeMap<UsabilityStatus, usize> = [
            UsabilityStatus::HasComments,
            UsabilityStatus::LatexNoComments,
            UsabilityStatus::NoLatex,
            UsabilityStatus::NoSource,
        ]
        .into_iter()
        .map(|s| (s, 0))
        .collect();
        let mut total = 0;
        for item in items {
            *counts.entry(item.status).or_default() += 1;
            total += 1;
        }
        let ratio = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
        let ratios = counts.iter().map(|(s, n)| (*s, ratio(*n))).collect();
        let without = total - counts[&UsabilityStatus::HasComments];
        UsabilitySummary { total, counts, ratios, without_usable_ratio: ratio(without) }
    }
}
