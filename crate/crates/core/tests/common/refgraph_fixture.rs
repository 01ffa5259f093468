//! The 12-file reference-graph project, its hand-read edges and its build
//! access logs.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use latexposed::ingest::{FileClassTable, SubmissionRecord};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/refgraph")
}

pub fn record() -> SubmissionRecord {
    SubmissionRecord::from_dir("refgraph-fixture", &fixtures().join("project"), &FileClassTable::default()).unwrap()
}

/// Edges read off the fixture sources by hand.
pub const EXPECTED_EDGES: &[(&str, &str)] = &[
    ("main.tex", "sections/intro.tex"),
    ("main.tex", "sections/method.tex"),
    ("main.tex", "figs/plot.png"),
    ("main.tex", "refs.bib"),
    ("main.tex", "main.bbl"),
    ("sections/method.tex", "figs/diagram.pdf"),
];

/// Repeated relaxation until nothing changes.
pub fn closure_oracle(roots: &[&str], edges: &[(&str, &str)]) -> BTreeSet<String> {
    let mut seen: BTreeSet<String> = roots.iter().map(|r| r.to_string()).collect();
    loop {
        let before = seen.len();
        for (a, b) in edges {
            if seen.contains(*a) {
                seen.insert(b.to_string());
            }
        }
        if seen.len() == before {
            return seen;
        }
    }
}

pub fn excluded_by_name(path: &str) -> bool {
    [".bbl", ".bib", ".eps", ".png", ".pdf", ".jpg", ".sty", ".cls"].iter().any(|e| path.ends_with(e))
}

/// Project files the engine and BibTeX opened for reading. Files the run
/// wrote before reading back (.aux) are not project inputs.
pub fn access_log_reads() -> BTreeSet<String> {
    let fls = fs::read_to_string(fixtures().join("build/main.fls")).unwrap();
    let blg = fs::read_to_string(fixtures().join("build/main.blg")).unwrap();
    let written: BTreeSet<&str> =
        fls.lines().filter_map(|l| l.strip_prefix("OUTPUT ")).map(|p| p.trim_start_matches("./")).collect();
    let mut reads: BTreeSet<String> = fls
        .lines()
        .filter_map(|l| l.strip_prefix("INPUT ./"))
        .filter(|p| !written.contains(p))
        .map(str::to_string)
        .collect();
    reads.extend(
        blg.lines()
            .filter_map(|l| l.split_once("Database file #"))
            .map(|(_, r)| r.split_once(": ").unwrap().1.to_string()),
    );
    reads
}
