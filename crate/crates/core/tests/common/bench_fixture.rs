use std::collections::BTreeMap;
use std::path::PathBuf;

use latexposed::bench::{load_dataset, GoldSnippet};
use latexposed::labels::LabelSet;
use serde::Deserialize;

pub fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bench")
}

#[derive(Deserialize)]
pub struct Row {
    pub text: String,
    pub pred: LabelSet,
}

#[derive(Debug, Deserialize, PartialEq, Eq)]
pub struct Cell {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Deserialize)]
pub struct Expected {
    pub snippets: usize,
    pub exact_matches: usize,
    pub at_least_one: usize,
    pub per_category: BTreeMap<String, Cell>,
}

pub fn dataset() -> Vec<GoldSnippet> {
    load_dataset(&dir().join("bench12.jsonl")).unwrap()
}

/// Hand-scored predictions keyed by text.
pub fn predictions() -> Vec<(String, LabelSet)> {
    let rows: Vec<Row> = latexposed::jsonl::read_jsonl(dir().join("bench12.jsonl")).unwrap();
    rows.into_iter().map(|r| (r.text, r.pred)).collect()
}

pub fn expected() -> Expected {
    serde_json::from_str(&std::fs::read_to_string(dir().join("expected.json")).unwrap()).unwrap()
}
