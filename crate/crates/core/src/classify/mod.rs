//! Entity extraction over cleaned comments through pluggable backends.

mod baseline;
mod cache;
mod cost;
mod parse;
mod prompt;
mod remote;

use std::collections::BTreeMap;
use std::ops::Range;

use rayon::prelude::*;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

pub use baseline::BaselineBackend;
pub use cache::{cache_key, TranscriptCache};
pub use cost::{as_percent, estimate_cost, estimate_total_cost, reduction};
pub use parse::{parse_response, ParseError};
pub use prompt::{build_prompt, prompt_overhead, split_batches, system_prompt, PromptError, CATEGORY_DEFINITIONS};
pub use remote::{api_key_from_env, RemoteBackend, RemoteConfigError, RemoteModelConfig, API_KEY_ENV, ENDPOINT_ENV};

use crate::clean::{CleanedComment, TokenEstimator};
use crate::labels::LabelSet;
use crate::patterns::{Locus, Origin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pricing {
    pub input_per_m: Decimal,
    pub output_per_m: Option<Decimal>,
}

impl Pricing {
    pub fn free() -> Self {
        Pricing { input_per_m: Decimal::ZERO, output_per_m: None }
    }
}

/// Token counts reported by a backend.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("HTTP status {0}")]
    Http(u16),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("response: {0}")]
    Parse(#[from] ParseError),
}

/// A classifier of snippet batches. `classify` returns exactly one set per
/// snippet or an error; it never pads a failed batch with guesses.
pub trait DetectorBackend: Send + Sync {
    fn name(&self) -> &str;
    fn pricing(&self) -> Pricing;
    fn classify(&self, snippets: &[&str]) -> Result<Vec<LabelSet>, BackendError>;
    fn usage(&self) -> Usage {
        Usage::default()
    }
}

/// Checks the count contract around a backend call.
pub fn classify_checked(backend: &dyn DetectorBackend, snippets: &[&str]) -> Result<Vec<LabelSet>, BackendError> {
    let sets = backend.classify(snippets)?;
    if sets.len() != snippets.len() {
        return Err(ParseError::CountMismatch { expected: snippets.len(), got: sets.len() }.into());
    }
    Ok(sets)
}

/// Snippet range of one batch and its labels.
pub type BatchResult = (Range<usize>, Result<Vec<LabelSet>, BackendError>);

/// Per-batch results over `snippets`, in batch order. Batches run in
/// parallel; remote backends bound their own concurrency.
pub fn classify_all(
    backend: &dyn DetectorBackend,
    snippets: &[&str],
    budget: u64,
    estimator: &dyn TokenEstimator,
) -> Vec<BatchResult> {
    let batches = split_batches(snippets, budget, estimator);
    batches
        .into_par_iter()
        .map(|r| {
            let res = classify_checked(backend, &snippets[r.clone()]);
            (r, res)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub locus: Locus,
    /// Index of the comment in the classifier input.
    pub index: usize,
    pub labels: LabelSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub paper_id: String,
    pub snippets: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyOutput {
    pub backend: String,
    pub predictions: Vec<Prediction>,
    pub failures: Vec<BatchFailure>,
    /// Estimated prompt tokens of every batch sent.
    pub prompt_tokens: u64,
}

/// Classifies each paper's comments as one block, split on the token
/// budget. Output is ordered by paper id and then comment order.
pub fn classify_comments(
    backend: &dyn DetectorBackend,
    comments: &[CleanedComment],
    budget: u64,
    estimator: &dyn TokenEstimator,
) -> ClassifyOutput {
    let mut by_paper: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in comments.iter().enumerate() {
        by_paper.entry(&c.comment.paper_id).or_default().push(i);
    }
    let per_paper: Vec<(Vec<Prediction>, Vec<BatchFailure>, u64)> = by_paper
        .par_iter()
        .map(|(paper, idx)| {
            let texts: Vec<&str> = idx.iter().map(|&i| comments[i].normalized.as_str()).collect();
            let mut preds = Vec::new();
            let mut fails = Vec::new();
            let mut tokens = 0;
            for (range, res) in classify_all(backend, &texts, budget, estimator) {
                tokens += estimator.estimate(&system_prompt())
                    + estimator.estimate(&build_prompt(&texts[range.clone()]).unwrap_or_default());
                match res {
                    Ok(sets) => {
                        for (k, labels) in range.clone().zip(sets) {
                            let c = &comments[idx[k]].comment;
                            let locus = Locus {
                                paper_id: c.paper_id.clone(),
                                file: c.file.clone(),
                                line: c.line,
                                origin: Origin::Comment,
                            };
                            preds.push(Prediction { locus, index: idx[k], labels });
                        }
                    }
                    Err(e) => {
                        log::warn!("{paper}: batch of {} snippets failed: {e}", range.len());
                        fails.push(BatchFailure {
                            paper_id: paper.to_string(),
                            snippets: range.len(),
                            error: e.to_string(),
                        });
                    }
                }
            }
            (preds, fails, tokens)
        })
        .collect();
    let mut out = ClassifyOutput { backend: backend.name().to_string(), ..Default::default() };
    for (p, f, t) in per_paper {
        out.predictions.extend(p);
        out.failures.extend(f);
        out.prompt_tokens += t;
    }
    out
}
