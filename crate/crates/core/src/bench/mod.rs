//! Scoring detector backends on labeled snippet datasets.

mod embed;
mod table;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

pub use embed::{build_embedded_dataset, embed_offset, EmbedConfig};
pub use table::render_table;

use crate::classify::{classify_all, estimate_cost, estimate_total_cost, BackendError, DetectorBackend, Pricing};
use crate::clean::TokenEstimator;
use crate::jsonl::{read_jsonl, JsonlError};
use crate::labels::{CategoryLabel, LabelSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldSnippet {
    pub id: String,
    pub text: String,
    pub gold: LabelSet,
    /// Byte offset of the sensitive text inside filler, for embedded sets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed_offset: Option<usize>,
}

pub fn load_dataset(path: &Path) -> Result<Vec<GoldSnippet>, JsonlError> {
    read_jsonl(path)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub backend: String,
    pub snippets: usize,
    pub exact_matches: usize,
    pub at_least_one: usize,
    pub ema: f64,
    pub one: f64,
    pub per_category: BTreeMap<CategoryLabel, Confusion>,
    /// Snippets whose batch failed; scored as `{OTHER}`.
    pub failed: Vec<String>,
    pub input_tokens: u64,
    pub price_per_m_input: Decimal,
    /// Input-only cost of the run.
    pub est_cost: Decimal,
    /// Input plus output cost, when the backend reports output usage and
    /// an output price is configured.
    pub est_cost_all: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("pair count differs: {gold} gold, {pred} predicted")]
    Length { gold: usize, pred: usize },
}

/// Exact match: equal sets. At-least-one: any shared label, where `{OTHER}`
/// matches only `{OTHER}`.
pub fn snippet_scores(gold: &LabelSet, pred: &LabelSet) -> (bool, bool) {
    (gold == pred, gold.intersects(pred))
}

/// Scores parallel gold and predicted sets. Returns exact-match count,
/// at-least-one count and the label-wise confusion of the sensitive labels.
pub fn score(
    gold: &[LabelSet],
    pred: &[LabelSet],
) -> Result<(usize, usize, BTreeMap<CategoryLabel, Confusion>), EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::Length { gold: gold.len(), pred: pred.len() });
    }
    let mut conf: BTreeMap<CategoryLabel, Confusion> =
        CategoryLabel::SENSITIVE.iter().map(|l| (*l, Confusion::default())).collect();
    let (mut ema, mut one) = (0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let (e, o) = snippet_scores(g, p);
        ema += e as usize;
        one += o as usize;
        for l in CategoryLabel::SENSITIVE {
            let c = conf.get_mut(&l).expect("all sensitive labels present");
            match (g.contains(l), p.contains(l)) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    assert!(ema <= one, "exact matches cannot exceed at-least-one matches");
    Ok((ema, one, conf))
}

/// Runs `backend` over `dataset` in budgeted batches and scores it.
pub fn evaluate(
    backend: &dyn DetectorBackend,
    dataset: &[GoldSnippet],
    budget: u64,
    estimator: &dyn TokenEstimator,
) -> Result<EvalReport, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let texts: Vec<&str> = dataset.iter().map(|g| g.text.as_str()).collect();
    let mut pred = vec![LabelSet::other(); dataset.len()];
    let mut failed = Vec::new();
    let mut input_tokens = 0;
    let before = backend.usage();
    for (range, res) in classify_all(backend, &texts, budget, estimator) {
        input_tokens += estimator.estimate(&crate::classify::system_prompt())
            + estimator.estimate(&crate::classify::build_prompt(&texts[range.clone()]).unwrap_or_default());
        match res {
            Ok(sets) => {
                for (i, s) in range.zip(sets) {
                    pred[i] = s;
                }
            }
            Err(e) => {
                log::warn!("batch {range:?} failed: {e}");
                failed.extend(dataset[range].iter().map(|g| g.id.clone()));
            }
        }
    }
    let after = backend.usage();
    let gold: Vec<LabelSet> = dataset.iter().map(|g| g.gold.clone()).collect();
    let (ema, one, per_category) = score(&gold, &pred)?;
    let Pricing { input_per_m, output_per_m } = backend.pricing();
    let reported_in = after.input_tokens - before.input_tokens;
    let billed_in = if reported_in > 0 { reported_in } else { input_tokens };
    let n = dataset.len() as f64;
    Ok(EvalReport {
        backend: backend.name().to_string(),
        snippets: dataset.len(),
        exact_matches: ema,
        at_least_one: one,
        ema: ema as f64 / n,
        one: one as f64 / n,
        per_category,
        failed,
        input_tokens: billed_in,
        price_per_m_input: input_per_m,
        est_cost: estimate_cost(billed_in, input_per_m),
        est_cost_all: estimate_total_cost(
            billed_in,
            after.output_tokens - before.output_tokens,
            input_per_m,
            output_per_m,
        ),
    })
}

/// Returns the gold labels of known texts; unknown texts get `{OTHER}`.
pub struct GoldEchoBackend {
    gold: HashMap<String, LabelSet>,
}

impl GoldEchoBackend {
    pub fn new(dataset: &[GoldSnippet]) -> Self {
        GoldEchoBackend { gold: dataset.iter().map(|g| (g.text.clone(), g.gold.clone())).collect() }
    }
}

impl DetectorBackend for GoldEchoBackend {
    fn name(&self) -> &str {
        "gold-echo"
    }

    fn pricing(&self) -> Pricing {
        Pricing::free()
    }

    fn classify(&self, snippets: &[&str]) -> Result<Vec<LabelSet>, BackendError> {
        Ok(snippets.iter().map(|s| self.gold.get(*s).cloned().unwrap_or_else(LabelSet::other)).collect())
    }
}

/// Replays fixed predictions keyed by snippet text.
pub struct FixedBackend {
    name: String,
    answers: HashMap<String, LabelSet>,
}

impl FixedBackend {
    pub fn new(name: &str, answers: impl IntoIterator<Item = (String, LabelSet)>) -> Self {
        FixedBackend { name: name.to_string(), answers: answers.into_iter().collect() }
    }
}

impl DetectorBackend for FixedBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn pricing(&self) -> Pricing {
        Pricing::free()
    }

    fn classify(&self, snippets: &[&str]) -> Result<Vec<LabelSet>, BackendError> {
        snippets
            .iter()
            .map(|s| self.answers.get(*s).cloned().ok_or_else(|| BackendError::Config(format!("no answer for `{s}`"))))
            .collect()
    }
}
