//! One PASS/FAIL line per acceptance criterion. Exits nonzero on any FAIL.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use common::bench_fixture;
use common::corpus::{all_files, build_placebo, build_planted, Planted};
use common::iban_oracle::{generate_valid, mutate, oracle_valid};
use common::lexer_oracle::{check_agreement, fixture_paths};
use common::refgraph_fixture::{access_log_reads, closure_oracle, excluded_by_name, record, EXPECTED_EDGES};
use latexposed::bench::{evaluate, FixedBackend, GoldEchoBackend};
use latexposed::classify::{as_percent, estimate_cost, reduction};
use latexposed::clean::{clean_corpus, normalize, ByteHeuristic, CleanConfig};
use latexposed::comments::{CommentKind, CommentRecord};
use latexposed::exif::read_exif;
use latexposed::labels::CategoryLabel;
use latexposed::patterns::{validate_iban, Engine};
use latexposed::pipeline::{run, RunConfig, RunOutcome};
use latexposed::refgraph::{analyze_submission, RefgraphConfig};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

struct PlantedRun {
    planted: Vec<Planted>,
    outcome: RunOutcome,
    placebo: RunOutcome,
    elapsed: Duration,
    out_dirs: Vec<std::path::PathBuf>,
    _tmp: tempfile::TempDir,
}

fn planted_run() -> PlantedRun {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    let planted = build_planted(&corpus);
    let out = tmp.path().join("out");
    let start = Instant::now();
    let outcome = run(&RunConfig { corpus, output: out.clone(), ..RunConfig::default() }).unwrap();
    let elapsed = start.elapsed();
    let placebo_dir = tmp.path().join("placebo");
    build_placebo(&placebo_dir);
    let placebo_out = tmp.path().join("placebo-out");
    let placebo = run(&RunConfig { corpus: placebo_dir, output: placebo_out.clone(), ..RunConfig::default() }).unwrap();
    PlantedRun { planted, outcome, placebo, elapsed, out_dirs: vec![out, placebo_out], _tmp: tmp }
}

fn c1_planted_recall(r: &PlantedRun) -> Check {
    let missed: Vec<&str> = r
        .planted
        .iter()
        .filter(|p| {
            !r.outcome
                .findings
                .iter()
                .any(|f| f.paper_id == p.paper_id && f.category == p.category && f.method.as_str() == p.method)
        })
        .map(|p| p.class)
        .collect();
    ensure!(r.planted.len() == 15, "{} planted classes", r.planted.len());
    ensure!(r.outcome.submissions == 20, "{} submissions", r.outcome.submissions);
    ensure!(missed.is_empty(), "missed {missed:?}");
    ensure!(r.placebo.findings.is_empty(), "{} placebo findings", r.placebo.findings.len());
    ensure!(r.elapsed < Duration::from_secs(60), "took {:?}", r.elapsed);
    Ok(format!("15/15 classes over 20 submissions, 0 placebo findings, {:.1}s", r.elapsed.as_secs_f64()))
}

fn c2_lexer_oracle() -> Check {
    let paths = fixture_paths();
    ensure!(paths.len() == 50, "{} fixtures", paths.len());
    for p in &paths {
        let src = fs::read_to_string(p).map_err(|e| e.to_string())?;
        check_agreement(&src).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok("50/50 fixtures agree, round trip byte-exact".into())
}

fn c3_dedup_boundary() -> Check {
    let mut corpus = Vec::new();
    for k in [9usize, 10, 11, 12] {
        for copy in 0..k {
            corpus.push(CommentRecord {
                paper_id: format!("p{copy:02}"),
                file: "main.tex".into(),
                line: k,
                col: 0,
                raw: format!("%{} remark seen {k} times", " ".repeat(copy % 2)),
                kind: CommentKind::Line,
            });
        }
    }
    let (out, _) = clean_corpus(&corpus, &CleanConfig::default(), &ByteHeuristic);
    let kept: BTreeSet<&str> = out.iter().map(|c| c.normalized.as_str()).collect();
    let mut counts: HashMap<String, usize> = HashMap::new();
    for c in &corpus {
        *counts.entry(normalize(&c.raw)).or_default() += 1;
    }
    for (t, n) in &counts {
        ensure!(kept.contains(t.as_str()) == (*n <= 10), "{t:?} seen {n} times");
    }
    ensure!(out.len() == 9 + 10, "{} kept", out.len());
    Ok("10x kept, 11x dropped".into())
}

fn c4_refgraph() -> Check {
    let rec = record();
    ensure!(rec.files.len() == 12, "{} files", rec.files.len());
    let report = analyze_submission(&rec, &RefgraphConfig::default());
    let oracle = closure_oracle(&["main.tex"], EXPECTED_EDGES);
    let logged = access_log_reads();
    ensure!(report.reachable == oracle, "reachable {:?} vs closure {oracle:?}", report.reachable);
    ensure!(report.reachable == logged, "reachable {:?} vs access log {logged:?}", report.reachable);
    let all: BTreeSet<String> = rec.files.iter().map(|f| f.path.clone()).collect();
    let unref: BTreeSet<String> = all.difference(&oracle).cloned().collect();
    ensure!(report.unreferenced == unref, "unreferenced {:?}", report.unreferenced);
    let cands: BTreeSet<String> = report.candidates.iter().map(|c| c.path.clone()).collect();
    let want: BTreeSet<String> = unref.iter().filter(|p| !excluded_by_name(p)).cloned().collect();
    ensure!(cands == want, "candidates {cands:?}");
    ensure!(
        cands.iter().all(|p| !p.ends_with(".bbl") && !p.ends_with(".bib") && !p.ends_with(".eps")),
        "excluded type in {cands:?}"
    );
    Ok(format!("{} reachable, {} unreferenced, candidates {:?}", oracle.len(), unref.len(), cands))
}

fn c5_iban() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1BA4);
    let valid: Vec<String> = (0..100).map(|_| generate_valid(&mut rng)).collect();
    let invalid: Vec<String> = valid.iter().map(|v| mutate(v, &mut rng)).collect();
    let mut agree = 0;
    for s in valid.iter().chain(&invalid) {
        ensure!(validate_iban(s).ok() == oracle_valid(s), "disagree on {s}");
        agree += 1;
    }
    ensure!(valid.iter().all(|v| oracle_valid(v) == Some(true)), "generator produced an invalid IBAN");
    ensure!(invalid.iter().all(|v| oracle_valid(v) == Some(false)), "mutation left a valid IBAN");
    Ok(format!("{agree}/200 agree with big-integer mod 97"))
}

fn c6_exif() -> Check {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/exif");
    let cases: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(dir.join("expected.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut cuts = 0;
    for case in &cases {
        let bytes = fs::read(dir.join(case["file"].as_str().unwrap())).map_err(|e| e.to_string())?;
        let meta = read_exif(&bytes, "f").map_err(|e| e.to_string())?;
        if case.get("lat").is_some() {
            let g = meta.gps.ok_or("no gps decoded")?;
            for (key, got) in [("lat", g.lat), ("lon", g.lon)] {
                let mut exact = Ratio::from_integer(0i128);
                for (i, p) in case[key].as_array().unwrap().iter().enumerate() {
                    exact += Ratio::new(p[0].as_i64().unwrap() as i128, p[1].as_i64().unwrap() as i128)
                        / 60i128.pow(i as u32);
                }
                if matches!(case[format!("{key}_ref")].as_str(), Some("S" | "W")) {
                    exact = -exact;
                }
                let e = *exact.numer() as f64 / *exact.denom() as f64;
                worst = worst.max((got - e).abs());
            }
        }
        let caught = panic::catch_unwind(|| {
            for cut in 0..=bytes.len() {
                let _ = read_exif(&bytes[..cut], "t");
            }
        });
        ensure!(caught.is_ok(), "panic on truncation of {}", case["file"]);
        cuts += bytes.len() + 1;
    }
    ensure!(worst < 1e-6, "max error {worst:e}");
    Ok(format!("max GPS error {worst:.1e} deg, {cuts} truncations without a crash"))
}

fn c7_cost() -> Check {
    let d = |s: &str| Decimal::from_str(s).unwrap();
    let a = estimate_cost(224_000_000, d("0.07"));
    ensure!(a == d("15.68"), "224e6 x 0.07/M = {a}");
    let r = reduction(2_400_000_000, 275_000_000);
    ensure!(as_percent(r, 1) == d("88.5"), "reduction {}", as_percent(r, 1));
    ensure!(as_percent(r, 0) == d("89"), "rounded reduction {}", as_percent(r, 0));
    let b = estimate_cost(275_000_000, d("1.25"));
    ensure!(b == d("343.75"), "275e6 x 1.25/M = {b}");
    ensure!(b.round_sf(2) == Some(d("340")), "two significant figures");
    Ok(format!("${a}, {}% (~{}%), ${b} (~$340)", as_percent(r, 1), as_percent(r, 0)))
}

fn c8_eval() -> Check {
    let data = bench_fixture::dataset();
    let want = bench_fixture::expected();
    let r = evaluate(&FixedBackend::new("hand", bench_fixture::predictions()), &data, 8000, &ByteHeuristic)
        .map_err(|e| e.to_string())?;
    ensure!(r.snippets == 12 && want.snippets == 12, "{} snippets", r.snippets);
    ensure!(
        (r.exact_matches, r.at_least_one) == (want.exact_matches, want.at_least_one),
        "EMA {} ONE {}",
        r.exact_matches,
        r.at_least_one
    );
    for (label, cell) in &want.per_category {
        let got = r.per_category[&label.parse::<CategoryLabel>().unwrap()];
        ensure!((got.tp, got.fp, got.fn_) == (cell.tp, cell.fp, cell.fn_), "{label}: {got:?}");
    }
    ensure!(r.ema <= r.one, "EMA > ONE");
    let echo = evaluate(&GoldEchoBackend::new(&data), &data, 8000, &ByteHeuristic).map_err(|e| e.to_string())?;
    ensure!(echo.ema == 1.0 && echo.one == 1.0, "gold echo {} / {}", echo.ema, echo.one);
    Ok(format!("EMA {}/12, ONE {}/12, confusion exact, gold echo 1.0/1.0", r.exact_matches, r.at_least_one))
}

fn c9_throughput() -> Check {
    let engine = Engine::with_defaults();
    let rules = engine.rules.rules.len();
    ensure!(rules >= 1700, "only {rules} rules compiled");
    const TOTAL: usize = 100_000_000;
    const SLICE: usize = 10_000_000;
    let mut scanned = 0;
    let mut matches = 0;
    let start = Instant::now();
    let mut seed = 0;
    while scanned < TOTAL {
        let comments = common::synth::comments(SLICE.min(TOTAL - scanned), seed);
        scanned += comments.iter().map(|c| c.raw.len()).sum::<usize>();
        matches += engine.scan_comments(&comments).len();
        seed += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 600.0, "{secs:.0}s for {scanned} bytes");
    Ok(format!("{rules} rules, {} MB in {secs:.1}s ({matches} raw matches)", scanned / 1_000_000))
}

fn c10_hermetic(r: &PlantedRun) -> Check {
    let mut files = 0;
    for dir in &r.out_dirs {
        for f in all_files(dir) {
            let bytes = fs::read(&f).map_err(|e| e.to_string())?;
            files += 1;
            for p in &r.planted {
                for s in &p.secrets {
                    let leaked = bytes.windows(s.len()).any(|w| w == s.as_bytes());
                    ensure!(!leaked, "{} contains {s:?} ({})", f.display(), p.class);
                }
            }
        }
    }
    let secrets: usize = r.planted.iter().map(|p| p.secrets.len()).sum();
    Ok(format!("{secrets} planted strings absent from {files} output files"))
}

fn report(id: &str, name: &str, f: impl FnOnce() -> Check) -> bool {
    let res = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    match &res {
        Ok(detail) => println!("PASS {id} {name}: {detail}"),
        Err(why) => println!("FAIL {id} {name}: {why}"),
    }
    res.is_ok()
}

fn main() -> ExitCode {
    let planted = panic::catch_unwind(planted_run);
    if planted.is_err() {
        println!("FAIL setup: planted corpus run panicked");
    }
    let planted = planted.ok();
    let need = |r: &Option<PlantedRun>| -> Result<(), String> {
        r.as_ref().map(|_| ()).ok_or_else(|| "no pipeline run".into())
    };

    let results = [
        report("C1", "planted-secret recall", || {
            need(&planted).and_then(|_| c1_planted_recall(planted.as_ref().unwrap()))
        }),
        report("C2", "comment-lexer oracle equivalence", c2_lexer_oracle),
        report("C3", "dedup boundary", c3_dedup_boundary),
        report("C4", "reference-graph correctness", c4_refgraph),
        report("C5", "IBAN validator", c5_iban),
        report("C6", "EXIF GPS decode and truncation", c6_exif),
        report("C7", "cost arithmetic", c7_cost),
        report("C8", "evaluation metrics", c8_eval),
        report("C9", "throughput smoke", c9_throughput),
        report("C10", "redaction hermeticity", || need(&planted).and_then(|_| c10_hermetic(planted.as_ref().unwrap()))),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
