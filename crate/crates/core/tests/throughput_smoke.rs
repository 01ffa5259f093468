mod common;

use std::time::Instant;

use latexposed::patterns::Engine;

#[test]
fn full_rule_set_scans_synthetic_comments() {
    let engine = Engine::with_defaults();
    assert!(engine.rules.rules.len() >= 1700, "{} rules", engine.rules.rules.len());
    let comments = common::synth::comments(8 << 20, 11);
    let bytes: usize = comments.iter().map(|c| c.raw.len()).sum();
    let start = Instant::now();
    let matches = engine.scan_comments(&comments);
    let secs = start.elapsed().as_secs_f64();
    eprintln!("{} MiB in {secs:.2}s, {} matches", bytes >> 20, matches.len());
    // 100 MB in 10 minutes is about 0.17 MB/s; an 8 MiB slice must finish
    // well within its share.
    assert!(secs < 48.0);
}
