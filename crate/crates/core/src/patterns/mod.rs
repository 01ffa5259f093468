//! Pattern matching over comments and candidate files: a compiled rule set
//! plus structural detectors, with placeholder suppression.

mod detectors;
mod entropy;
mod iban;
mod ip;
mod jwt;
mod prefilter;
mod rules;
mod suppress;
mod url;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use detectors::{detect_structural, url_category, Detection, DetectorConfig};
pub use entropy::{is_base64url_alphabet, shannon_entropy, TokenHeuristic};
pub use iban::{compact as compact_iban, mod97, registered_length, validate_iban, IbanShapeError};
pub use ip::{classify_ip, kind_of, IpKind, IpRecord, MalformedIp};
pub use jwt::analyze_jwt;
pub use prefilter::required_prefixes;
pub use rules::{
    default_rules, load_rules, parse_rules, slug, CompiledRule, Confidence, LoadedRules, PatternRule, RejectedRule,
    RuleFileError, RuleSet, DEFAULT_RULES_YAML,
};
pub use suppress::{SuppressionList, SuppressionParseError, DEFAULT_SUPPRESSIONS};
pub use url::{classify_url, host_matches, is_private_git, provider_for, CloudProvider, UrlRecord};

use crate::comments::CommentRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Comment,
    File,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Locus {
    pub paper_id: String,
    pub file: String,
    /// 1-based line of the match start.
    pub line: usize,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMatch {
    pub rule_id: String,
    /// Finding category; `None` for values kept only for statistics.
    pub category: Option<String>,
    pub locus: Locus,
    /// Byte offset of `matched` within the scanned text.
    pub offset: usize,
    pub matched: String,
    pub context: String,
    pub suppressed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suppression_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub token: TokenHeuristic,
    /// Characters of context kept on each side of a match.
    pub context_chars: usize,
    pub structural: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { token: TokenHeuristic::default(), context_chars: 80, structural: true }
    }
}

/// Compiled rules, suppressions and settings, shared read-only by workers.
pub struct Engine {
    pub rules: RuleSet,
    pub suppressions: SuppressionList,
    pub config: ScanConfig,
}

/// File texts are scanned in pieces of about this size, cut at line breaks.
const FILE_CHUNK: usize = 1 << 20;

fn context(text: &str, start: usize, end: usize, chars: usize) -> String {
    let lo = if chars == 0 { start } else { text[..start].char_indices().rev().nth(chars - 1).map_or(0, |(i, _)| i) };
    let hi = text[end..].char_indices().nth(chars).map_or(text.len(), |(i, _)| end + i);
    text[lo..hi].to_string()
}

impl Engine {
    pub fn new(rules: RuleSet, suppressions: SuppressionList, config: ScanConfig) -> Self {
        Engine { rules, suppressions, config }
    }

    pub fn with_defaults() -> Self {
        Engine::new(RuleSet::compile(default_rules().rules), SuppressionList::builtin(), ScanConfig::default())
    }

    fn rule_suppression(&self, whole: &str, value: &str) -> Option<String> {
        if let Some(r) = self.suppressions.token_reason(whole) {
            return Some(r);
        }
        if value.len() < whole.len() && self.suppressions.is_placeholder(value) {
            return Some("placeholder value".into());
        }
        // Hosts embedded in the match, e.g. credentials in a documentation URL.
        for sep in ["://", "@"] {
            for (i, _) in whole.match_indices(sep) {
                let host: String = whole[i + sep.len()..]
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '.' || *c == '-')
                    .collect();
                if host.contains('.') || host == "localhost" {
                    if let Some(r) = self.suppressions.domain_reason(&host) {
                        return Some(r);
                    }
                }
            }
        }
        None
    }

    /// Matches of one text. `locus.line` is the line of the first byte of
    /// `text`; match lines are offset from it.
    pub fn scan(&self, text: &str, locus: &Locus) -> Vec<RawMatch> {
        let mut out = Vec::new();
        let line_at = {
            let newlines: Vec<usize> = text.bytes().enumerate().filter(|(_, b)| *b == b'\n').map(|(i, _)| i).collect();
            move |off: usize| locus.line + newlines.partition_point(|&n| n < off)
        };
        let mk = |rule_id: String, category: Option<String>, start: usize, end: usize, reason: Option<String>, host| {
            RawMatch {
                rule_id,
                category,
                locus: Locus { line: line_at(start), ..locus.clone() },
                offset: start,
                matched: text[start..end].to_string(),
                context: context(text, start, end, self.config.context_chars),
                suppressed: reason.is_some(),
                suppression_reason: reason,
                host,
            }
        };

        for rule_idx in self.rules.candidates(text) {
            let rule = &self.rules.rules[rule_idx];
            for caps in rule.regex.captures_iter(text) {
                let whole = caps.get(0).expect("group 0");
                let m = if rule.has_group { caps.get(1).unwrap_or(whole) } else { whole };
                if m.is_empty() {
                    continue;
                }
                let reason = self.rule_suppression(whole.as_str(), m.as_str());
                out.push(mk(
                    rule.rule.id.clone(),
                    Some(rule.rule.category_hint.clone()),
                    m.start(),
                    m.end(),
                    reason,
                    None,
                ));
            }
        }
        if self.config.structural {
            let cfg = DetectorConfig { token: self.config.token.clone() };
            for d in detect_structural(text, &cfg, &self.suppressions) {
                out.push(mk(
                    d.rule_id.to_string(),
                    d.category.map(str::to_string),
                    d.range.start,
                    d.range.end,
                    d.suppressed,
                    d.host,
                ));
            }
        }
        sort_matches(&mut out);
        out
    }

    /// Scans each comment as its own text.
    pub fn scan_comments(&self, comments: &[CommentRecord]) -> Vec<RawMatch> {
        let mut out: Vec<RawMatch> = comments
            .par_iter()
            .flat_map_iter(|c| {
                let locus =
                    Locus { paper_id: c.paper_id.clone(), file: c.file.clone(), line: c.line, origin: Origin::Comment };
                self.scan(&c.raw, &locus)
            })
            .collect();
        sort_matches(&mut out);
        out
    }

    /// Scans a whole file. Offsets are relative to the file start.
    pub fn scan_file(&self, paper_id: &str, file: &str, bytes: &[u8]) -> Vec<RawMatch> {
        let text = String::from_utf8_lossy(bytes);
        let mut out = Vec::new();
        let mut start = 0;
        let mut line = 1;
        while start < text.len() {
            let mut end = (start + FILE_CHUNK).min(text.len());
            if end < text.len() {
                end = text[start..end].rfind('\n').map_or(end, |p| start + p + 1);
                while !text.is_char_boundary(end) {
                    end += 1;
                }
            }
            let chunk = &text[start..end];
            let locus = Locus { paper_id: paper_id.to_string(), file: file.to_string(), line, origin: Origin::File };
            out.extend(self.scan(chunk, &locus).into_iter().map(|mut m| {
                m.offset += start;
                m
            }));
            line += chunk.bytes().filter(|b| *b == b'\n').count();
            start = end;
        }
        sort_matches(&mut out);
        out
    }
}

/// Deterministic order: locus, offset, rule id, matched text.
pub fn sort_matches(matches: &mut [RawMatch]) {
    matches.sort_by(|a, b| {
        (&a.locus, a.offset, &a.rule_id, &a.matched).cmp(&(&b.locus, b.offset, &b.rule_id, &b.matched))
    });
}
