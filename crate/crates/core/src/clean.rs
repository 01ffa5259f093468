//! Comment cleaning: normalization, boilerplate rejection, corpus-frequency
//! deduplication and token accounting.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comments::CommentRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanConfig {
    /// A text seen more than this many times in the corpus is dropped.
    pub dedup_threshold: u64,
    pub boilerplate_min_separator_run: usize,
    pub drop_single_word: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig { dedup_threshold: 10, boilerplate_min_separator_run: 4, drop_single_word: true }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("dedup_threshold must be at least 1")]
pub struct InvalidCleanConfig;

impl CleanConfig {
    pub fn validate(&self) -> Result<(), InvalidCleanConfig> {
        if self.dedup_threshold >= 1 {
            Ok(())
        } else {
            Err(InvalidCleanConfig)
        }
    }
}

/// Strips surrounding whitespace and leading `%` runs (repeatedly, so
/// `"% % x"` becomes `"x"`), then collapses internal whitespace runs.
pub fn normalize(raw: &str) -> String {
    let mut s = raw;
    loop {
        let t = s.trim().trim_start_matches('%');
        if t.len() == s.len() {
            break;
        }
        s = t;
    }
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

const DECORATIVE: &[char] = &['-', '=', '*', '%', '~', '_', '.'];

fn is_decorative_run(s: &str, min_run: usize) -> bool {
    let mut n = 0;
    for c in s.chars().filter(|c| !c.is_whitespace()) {
        if !DECORATIVE.contains(&c) {
            return false;
        }
        n += 1;
    }
    n >= min_run
}

/// Removes `\word` and `\x` tokens and any brace/bracket group whose content
/// holds no whitespace (an argument, not prose), then checks that no letters
/// remain. Grouped prose like `\emph{two words}` keeps its letters.
fn is_purely_syntactic(s: &str) -> bool {
    let chars: Vec<char> = s.chars().collect();
    let mut rest = String::with_capacity(s.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' {
            i += 1;
            if i < chars.len() && chars[i].is_ascii_alphabetic() {
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
            } else {
                i += 1;
            }
            continue;
        }
        if c == '{' || c == '[' {
            let close = if c == '{' { '}' } else { ']' };
            if let Some(len) = chars[i + 1..].iter().position(|&d| d == close || d == c) {
                let inner = &chars[i + 1..i + 1 + len];
                if chars[i + 1 + len] == close && !inner.iter().any(|d| d.is_whitespace()) {
                    i += len + 2;
                    continue;
                }
            }
        }
        rest.push(c);
        i += 1;
    }
    !rest.chars().any(char::is_alphabetic)
}

pub fn is_boilerplate(normalized: &str, config: &CleanConfig) -> bool {
    normalized.is_empty()
        || is_decorative_run(normalized, config.boilerplate_min_separator_run)
        || is_purely_syntactic(normalized)
        || (config.drop_single_word && !normalized.contains(' '))
}

pub trait TokenEstimator: Sync {
    fn name(&self) -> &str;
    fn estimate(&self, text: &str) -> u64;
}

/// `ceil(bytes / 4)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ByteHeuristic;

impl TokenEstimator for ByteHeuristic {
    fn name(&self) -> &str {
        "bytes/4"
    }

    fn estimate(&self, text: &str) -> u64 {
        (text.len() as u64).div_ceil(4)
    }
}

pub fn estimate_tokens(text: &str) -> u64 {
    ByteHeuristic.estimate(text)
}

/// Corpus frequency of normalized texts. Per-worker tables merge by addition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable(HashMap<String, u64>);

impl FrequencyTable {
    pub fn count<'a>(texts: impl IntoParallelIterator<Item = &'a str>) -> Self {
        texts
            .into_par_iter()
            .fold(FrequencyTable::default, |mut t, s| {
                t.add(s, 1);
                t
            })
            .reduce(FrequencyTable::default, FrequencyTable::merge)
    }

    pub fn add(&mut self, text: &str, n: u64) {
        if let Some(c) = self.0.get_mut(text) {
            *c += n;
        } else {
            self.0.insert(text.to_string(), n);
        }
    }

    pub fn merge(mut self, other: FrequencyTable) -> Self {
        if self.0.len() < other.0.len() {
            return other.merge(self);
        }
        for (k, v) in other.0 {
            *self.0.entry(k).or_default() += v;
        }
        self
    }

    pub fn get(&self, text: &str) -> u64 {
        self.0.get(text).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.0.len()
    }
}

/// Indices of `texts` whose frequency in `table` is at most `threshold`.
pub fn dedup_filter(texts: &[&str], table: &FrequencyTable, threshold: u64) -> Vec<usize> {
    texts.iter().enumerate().filter(|(_, t)| table.get(t) <= threshold).map(|(i, _)| i).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanStats {
    pub input_count: usize,
    pub output_count: usize,
    pub boilerplate_dropped: usize,
    pub duplicate_dropped: usize,
    pub retention_ratio: f64,
    pub tokens_before: u64,
    pub tokens_after: u64,
    pub reduction_ratio: f64,
    pub estimator: String,
}

impl CleanStats {
    pub fn from_counts(input: usize, output: usize, before: u64, after: u64, estimator: &str) -> Self {
        CleanStats {
            input_count: input,
            output_count: output,
            boilerplate_dropped: 0,
            duplicate_dropped: 0,
            retention_ratio: if input == 0 { 1.0 } else { output as f64 / input as f64 },
            tokens_before: before,
            tokens_after: after,
            reduction_ratio: if before == 0 { 0.0 } else { 1.0 - after as f64 / before as f64 },
            estimator: estimator.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanedComment {
    #[serde(flatten)]
    pub comment: CommentRecord,
    pub normalized: String,
}

/// Runs the whole cleaning pipeline over a corpus. Retained comments keep
/// their input order. Token counts use raw text before and normalized text
/// after.
pub fn clean_corpus(
    comments: &[CommentRecord],
    config: &CleanConfig,
    estimator: &dyn TokenEstimator,
) -> (Vec<CleanedComment>, CleanStats) {
    let normalized: Vec<String> = comments.par_iter().map(|c| normalize(&c.raw)).collect();
    let keep: Vec<bool> = normalized.par_iter().map(|n| !is_boilerplate(n, config)).collect();
    let table =
        FrequencyTable::count(normalized.par_iter().zip(keep.par_iter()).filter(|(_, k)| **k).map(|(n, _)| n.as_str()));

    let before: u64 = comments.par_iter().map(|c| estimator.estimate(&c.raw)).sum();
    let mut out = Vec::new();
    let mut boilerplate = 0;
    let mut duplicate = 0;
    for ((c, n), k) in comments.iter().zip(normalized).zip(keep) {
        if !k {
            boilerplate += 1;
        } else if table.get(&n) > config.dedup_threshold {
            duplicate += 1;
        } else {
            out.push(CleanedComment { comment: c.clone(), normalized: n });
        }
    }
    let after: u64 = out.par_iter().map(|c| estimator.estimate(&c.normalized)).sum();
    let mut stats = CleanStats::from_counts(comments.len(), out.len(), before, after, estimator.name());
    stats.boilerplate_dropped = boilerplate;
    stats.duplicate_dropped = duplicate;
    (out, stats)
}
