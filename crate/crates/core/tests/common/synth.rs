//! Deterministic synthetic comment text for throughput runs.

use latexposed::comments::{CommentKind, CommentRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "the",
    "proof",
    "lemma",
    "we",
    "show",
    "that",
    "bound",
    "holds",
    "for",
    "all",
    "inputs",
    "TODO",
    "fix",
    "this",
    "reviewer",
    "asked",
    "about",
    "baseline",
    "figure",
    "table",
    "section",
    "appendix",
    "see",
    "\\cite{smith20}",
    "\\ref{fig:arch}",
    "$x_i$",
    "version",
    "2.1",
    "server",
    "config",
    "token",
    "latency",
    "ms",
    "dataset",
    "split",
    "train",
    "eval",
    "http://arxiv.org/abs/2101.00001",
    "user",
    "key",
    "node",
    "cluster",
    "gpu",
    "0.93",
    "42",
];

/// Comments totalling at least `bytes` bytes, each a few hundred bytes long.
pub fn comments(bytes: usize, seed: u64) -> Vec<CommentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut total = 0;
    let mut n = 0usize;
    while total < bytes {
        let len = rng.gen_range(8..80);
        let raw: Vec<&str> = (0..len).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
        let raw = format!(" {}", raw.join(" "));
        total += raw.len();
        out.push(CommentRecord {
            paper_id: format!("synth.{:05}", n / 200),
            file: "main.tex".into(),
            line: n % 200 + 1,
            col: 0,
            raw,
            kind: CommentKind::Line,
        });
        n += 1;
    }
    out
}
