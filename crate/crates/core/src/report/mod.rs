//! Unified findings: severity, redaction, aggregation and report files.

mod aggregate;
mod emit;
mod redact;
mod severity;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use aggregate::{aggregate, AggregateStats, CountRow, TOP_DOMAINS};
pub use emit::{emit_reports, render_markdown, sort_findings, ReportPaths};
pub use redact::{redact, redact_email, redact_secret, redact_text, redact_url, RedactKind};
pub use severity::{Severity, SeverityMap, SeverityMapError, SeverityRule, DEFAULT_SEVERITY_TOML};

use crate::categories;
use crate::labels::{CategoryLabel, LabelSet};
use crate::patterns::{Locus, Origin, RawMatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Pattern matching over comments.
    PM,
    /// Entity extraction by a detector backend.
    EE,
    /// Logical filtering: unreferenced files and image metadata.
    LF,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::PM => "PM",
            Method::EE => "EE",
            Method::LF => "LF",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub paper_id: String,
    pub method: Method,
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<LabelSet>,
    pub severity: Severity,
    pub locus: Locus,
    pub evidence_redacted: String,
    pub rule_or_backend: String,
    /// URL host, kept for domain statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
}

/// Redaction applied to the evidence of a category.
pub fn redact_kind(category: &str, method: Method) -> RedactKind {
    if method == Method::EE {
        return RedactKind::Text;
    }
    match category {
        categories::UNIQUE_EMAILS => RedactKind::Email,
        categories::PRIVATE_DOCUMENTS
        | categories::CASA_TOKENS
        | categories::TOKEN_LIKE_URL
        | categories::PRIVATE_GIT => RedactKind::Url,
        categories::IMAGE_LOCATION | categories::IMAGE_DEVICE => RedactKind::None,
        _ => RedactKind::Secret,
    }
}

impl Finding {
    /// Builds a finding with redacted evidence and the mapped severity.
    pub fn new(
        paper_id: &str,
        method: Method,
        category: &str,
        locus: Locus,
        raw_evidence: impl AsRef<str>,
        rule_or_backend: &str,
        severities: &SeverityMap,
    ) -> Self {
        Finding {
            paper_id: paper_id.to_string(),
            method,
            category: category.to_string(),
            labels: None,
            severity: severities.severity_for(category),
            locus,
            evidence_redacted: redact(raw_evidence.as_ref(), redact_kind(category, method)),
            rule_or_backend: rule_or_backend.to_string(),
            host: None,
        }
    }

    /// Evidence that is a file path rather than file content.
    pub fn for_file(paper_id: &str, category: &str, path: &str, rule: &str, severities: &SeverityMap) -> Self {
        let locus = Locus { paper_id: paper_id.to_string(), file: path.to_string(), line: 0, origin: Origin::File };
        let mut f = Finding::new(paper_id, Method::LF, category, locus, "", rule, severities);
        f.evidence_redacted = path.to_string();
        f
    }
}

/// Re-derives the severity from `map`; nothing else changes.
pub fn assign_severity(mut finding: Finding, map: &SeverityMap) -> Finding {
    finding.severity = map.severity_for(&finding.category);
    finding
}

/// Findings for unsuppressed, categorized matches. Comment matches are PM
/// and file matches LF. Repeats of one value in one paper and category are
/// reported once, at the first locus.
pub fn findings_from_matches(matches: &[RawMatch], severities: &SeverityMap) -> Vec<Finding> {
    let mut seen: HashSet<(&str, &str, &str)> = HashSet::new();
    let mut out = Vec::new();
    for m in matches {
        let Some(category) = m.category.as_deref() else { continue };
        if m.suppressed || !seen.insert((&m.locus.paper_id, category, &m.matched)) {
            continue;
        }
        let method = match m.locus.origin {
            Origin::Comment => Method::PM,
            Origin::File => Method::LF,
        };
        let mut f =
            Finding::new(&m.locus.paper_id, method, category, m.locus.clone(), &m.matched, &m.rule_id, severities);
        f.host = m.host.clone();
        out.push(f);
    }
    out
}

pub fn label_category(label: CategoryLabel) -> Option<&'static str> {
    match label {
        CategoryLabel::Cred => Some(categories::LOGIN_CREDENTIALS),
        CategoryLabel::Pii => Some(categories::PII_EXPOSURE),
        CategoryLabel::Netid => Some(categories::NETWORK_IDENTIFIERS),
        CategoryLabel::Peer => Some(categories::PEER_REVIEW),
        CategoryLabel::Conf => Some(categories::AUTHOR_CONFLICTS),
        CategoryLabel::Other => None,
    }
}

/// One finding per flagged snippet, filed under its most severe label.
/// `{OTHER}` yields nothing.
pub fn finding_from_labels(
    locus: Locus,
    snippet: &str,
    labels: &LabelSet,
    backend: &str,
    severities: &SeverityMap,
) -> Option<Finding> {
    let category = labels
        .iter()
        .filter_map(label_category)
        .min_by_key(|c| (severities.severity_for(c), categories::ALL.iter().position(|(k, _)| k == c)))?;
    let paper_id = locus.paper_id.clone();
    let mut f = Finding::new(&paper_id, Method::EE, category, locus, snippet, backend, severities);
    f.labels = Some(labels.clone());
    Some(f)
}
