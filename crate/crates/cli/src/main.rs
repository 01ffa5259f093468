use std::collections::BTreeSet;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use latexposed::bench::{evaluate, load_dataset, render_table, GoldEchoBackend};
use latexposed::classify::{classify_comments, BaselineBackend, DetectorBackend};
use latexposed::clean::{clean_corpus, ByteHeuristic, CleanedComment};
use latexposed::comments::{extract_submission_comments, CommentRecord};
use latexposed::exif::read_exif;
use latexposed::ingest::{parse_wanted, plan_downloads, ArchiveManifest, FileClassTable, SubmissionRecord};
use latexposed::jsonl::{read_jsonl, to_jsonl_string, JsonlWriter};
use latexposed::pipeline::{self, BackendChoice, RunConfig, Stage};
use latexposed::refgraph::analyze_submission;
use latexposed::report::{
    aggregate, emit_reports, finding_from_labels, findings_from_matches, sort_findings, Finding, Severity,
};

/// Exit status for operational errors; 1 is reserved for `--fail-on`.
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "latexposed", version, about = "Find sensitive leftovers in LaTeX source packages")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline over a corpus directory.
    Run(RunArgs),
    /// Plan archive downloads from a manifest, or unpack a corpus.
    Ingest(IngestArgs),
    /// Dump every comment of a corpus as JSONL (raw text, unredacted).
    Comments {
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clean a comment dump: normalize, drop boilerplate and repeats.
    Clean {
        comments: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the statistics JSON; printed to stderr otherwise.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        dedup_threshold: Option<u64>,
    },
    /// Reference graph and unreferenced files of one submission directory.
    Graph { submission: PathBuf },
    /// Image metadata of every JPEG, PNG and TIFF under a directory.
    Exif {
        dir: PathBuf,
        /// Delete each image after reading it.
        #[arg(long)]
        strip: bool,
    },
    /// Pattern scan of comments and unreferenced files.
    Scan {
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit unredacted raw matches instead of findings.
        #[arg(long)]
        raw: bool,
    },
    /// Entity extraction over a cleaned comment dump.
    Classify {
        cleaned: PathBuf,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a backend on a labeled snippet dataset.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "baseline")]
        backend: BenchBackend,
        /// Write the report JSON here; the table goes to stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Rebuild summaries from a findings file.
    Report {
        findings: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Baseline,
    Remote,
}

impl From<BackendArg> for BackendChoice {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Baseline => BackendChoice::Baseline,
            BackendArg::Remote => BackendChoice::Remote,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchBackend {
    Baseline,
    Remote,
    GoldEcho,
}

#[derive(Clone, Copy, ValueEnum)]
enum FailOn {
    Critical,
    High,
    Medium,
    Low,
}

impl From<FailOn> for Severity {
    fn from(f: FailOn) -> Self {
        match f {
            FailOn::Critical => Severity::Critical,
            FailOn::High => Severity::High,
            FailOn::Medium => Severity::Medium,
            FailOn::Low => Severity::Low,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated stages; prerequisites are added.
    #[arg(long, value_delimiter = ',')]
    stages: Vec<String>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long, value_enum)]
    fail_on: Option<FailOn>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    severity_map: Option<PathBuf>,
    #[arg(long)]
    suppressions: Option<PathBuf>,
    #[arg(long)]
    work_dir: Option<PathBuf>,
    #[arg(long)]
    token_budget: Option<u64>,
    #[arg(long)]
    delete_images: bool,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, requires = "want")]
    manifest: Option<PathBuf>,
    /// File of wanted paper ids, one per line.
    #[arg(long)]
    want: Option<PathBuf>,
    /// Corpus of packages to unpack into `--out`.
    #[arg(long, conflicts_with = "manifest")]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn base_config(path: Option<&Path>) -> Result<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn apply_run_args(mut cfg: RunConfig, a: RunArgs) -> Result<RunConfig> {
    if let Some(c) = a.corpus {
        cfg.corpus = c;
    }
    if let Some(o) = a.out {
        cfg.output = o;
    }
    if !a.stages.is_empty() {
        cfg.stages = a
            .stages
            .iter()
            .map(|s| s.parse::<Stage>())
            .collect::<Result<BTreeSet<_>, _>>()
            .map_err(anyhow::Error::msg)?;
    }
    if let Some(b) = a.backend {
        cfg.backend = b.into();
    }
    if let Some(p) = a.parallelism {
        cfg.parallelism = p;
    }
    if let Some(f) = a.fail_on {
        cfg.fail_on = Some(f.into());
    }
    cfg.rules = a.rules.or(cfg.rules);
    cfg.severity_map = a.severity_map.or(cfg.severity_map);
    cfg.suppressions = a.suppressions.or(cfg.suppressions);
    cfg.work_dir = a.work_dir.or(cfg.work_dir);
    if let Some(t) = a.token_budget {
        cfg.token_budget = t;
    }
    cfg.delete_images |= a.delete_images;
    Ok(cfg)
}

/// Writes to `path`, or stdout when none is given.
fn output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn load_records(corpus: &Path, work: &Path, cfg: &RunConfig) -> Result<Vec<SubmissionRecord>> {
    Ok(pipeline::load_corpus(corpus, work, &FileClassTable::with_overrides(&cfg.file_classes))?)
}

fn images_under(dir: &Path, out: &mut Vec<PathBuf>) -> io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let p = e.path();
        if e.file_type()?.is_dir() {
            images_under(&p, out)?;
        } else if p
            .extension()
            .and_then(|x| x.to_str())
            .is_some_and(|x| ["jpg", "jpeg", "png", "tif", "tiff"].contains(&x.to_ascii_lowercase().as_str()))
        {
            out.push(p);
        }
    }
    Ok(())
}

fn backend_for(cfg: &RunConfig) -> Result<Box<dyn DetectorBackend>> {
    let engine = Arc::new(pipeline::build_engine(cfg)?);
    Ok(pipeline::make_backend(cfg, engine)?)
}

fn execute(cli: Cli) -> Result<u8> {
    let cfg = base_config(cli.config.as_deref())?;
    match cli.command {
        Command::Run(args) => {
            let cfg = apply_run_args(cfg, args)?;
            let outcome = pipeline::run(&cfg)?;
            eprintln!(
                "{} submissions, {} comments, {} findings in {} papers; reports in {}",
                outcome.submissions,
                outcome.comments,
                outcome.stats.total,
                outcome.stats.papers_with_findings,
                cfg.output.display()
            );
            Ok(outcome.exit_code(cfg.fail_on) as u8)
        }
        Command::Ingest(a) => {
            std::fs::create_dir_all(&a.out)?;
            if let (Some(m), Some(w)) = (&a.manifest, &a.want) {
                let manifest = ArchiveManifest::load(m)?;
                let wanted = parse_wanted(&std::fs::read_to_string(w)?);
                let plan = plan_downloads(&manifest, &wanted);
                for id in &plan.unknown {
                    log::warn!("{id} is in no archive");
                }
                let text = serde_json::to_string_pretty(&plan)? + "\n";
                std::fs::write(a.out.join("plan.json"), text)?;
                eprintln!(
                    "{} archives cover {} of {} wanted ids",
                    plan.archives.len(),
                    plan.covered_count(),
                    wanted.len()
                );
            } else if let Some(c) = &a.corpus {
                let records = load_records(c, &a.out, &cfg)?;
                let mut w = JsonlWriter::create(a.out.join("submissions.jsonl"))?;
                for r in &records {
                    w.write(r)?;
                }
                eprintln!("{} submissions unpacked", records.len());
            } else {
                bail!("ingest needs --manifest with --want, or --corpus");
            }
            Ok(0)
        }
        Command::Comments { corpus, out } => {
            let work = tempfile::tempdir()?;
            let records = load_records(&corpus, work.path(), &cfg)?;
            let comments: Vec<CommentRecord> = records.iter().flat_map(extract_submission_comments).collect();
            output(out.as_deref(), &to_jsonl_string(&comments)?)?;
            Ok(0)
        }
        Command::Clean { comments, out, stats, dedup_threshold } => {
            let mut clean_cfg = cfg.clean.clone();
            if let Some(t) = dedup_threshold {
                clean_cfg.dedup_threshold = t;
            }
            clean_cfg.validate()?;
            let records: Vec<CommentRecord> = read_jsonl(&comments)?;
            let (cleaned, s) = clean_corpus(&records, &clean_cfg, &ByteHeuristic);
            output(out.as_deref(), &to_jsonl_string(&cleaned)?)?;
            let s = serde_json::to_string_pretty(&s)? + "\n";
            match stats {
                Some(p) => std::fs::write(p, s)?,
                None => eprint!("{s}"),
            }
            Ok(0)
        }
        Command::Graph { submission } => {
            let id = submission.file_name().and_then(|n| n.to_str()).unwrap_or("submission").to_string();
            let record =
                SubmissionRecord::from_dir(&id, &submission, &FileClassTable::with_overrides(&cfg.file_classes))?;
            let report = analyze_submission(&record, &cfg.refgraph);
            output(None, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            Ok(0)
        }
        Command::Exif { dir, strip } => {
            let mut paths = Vec::new();
            images_under(&dir, &mut paths)?;
            let mut metas = Vec::new();
            for p in paths {
                let rel = p.strip_prefix(&dir).unwrap_or(&p).to_string_lossy().replace('\\', "/");
                let bytes = std::fs::read(&p)?;
                match read_exif(&bytes, &rel) {
                    Ok(m) => metas.push(m),
                    Err(e) => log::info!("{rel}: {e}"),
                }
                if strip {
                    std::fs::remove_file(&p)?;
                }
            }
            output(None, &to_jsonl_string(&metas)?)?;
            Ok(0)
        }
        Command::Scan { corpus, out, raw } => {
            let engine = pipeline::build_engine(&cfg)?;
            let severities = pipeline::load_severity_map(&cfg)?;
            let work = tempfile::tempdir()?;
            let records = load_records(&corpus, work.path(), &cfg)?;
            let mut matches = Vec::new();
            for r in &records {
                matches.extend(engine.scan_comments(&extract_submission_comments(r)));
                let g = analyze_submission(r, &cfg.refgraph);
                for c in &g.candidates {
                    if c.byte_size <= cfg.max_scan_bytes {
                        if let Ok(bytes) = std::fs::read(r.root_dir.join(&c.path)) {
                            matches.extend(engine.scan_file(&r.paper_id, &c.path, &bytes));
                        }
                    }
                }
            }
            latexposed::patterns::sort_matches(&mut matches);
            if raw {
                output(out.as_deref(), &to_jsonl_string(&matches)?)?;
            } else {
                let mut findings = findings_from_matches(&matches, &severities);
                sort_findings(&mut findings);
                output(out.as_deref(), &to_jsonl_string(&findings)?)?;
            }
            Ok(0)
        }
        Command::Classify { cleaned, backend, out } => {
            let mut cfg = cfg;
            if let Some(b) = backend {
                cfg.backend = b.into();
            }
            let backend = backend_for(&cfg)?;
            let severities = pipeline::load_severity_map(&cfg)?;
            let comments: Vec<CleanedComment> = read_jsonl(&cleaned)?;
            let result = classify_comments(backend.as_ref(), &comments, cfg.token_budget, &ByteHeuristic);
            let mut findings: Vec<Finding> = result
                .predictions
                .iter()
                .filter_map(|p| {
                    finding_from_labels(
                        p.locus.clone(),
                        &comments[p.index].normalized,
                        &p.labels,
                        &result.backend,
                        &severities,
                    )
                })
                .collect();
            sort_findings(&mut findings);
            output(out.as_deref(), &to_jsonl_string(&findings)?)?;
            for f in &result.failures {
                eprintln!("{}: batch of {} failed: {}", f.paper_id, f.snippets, f.error);
            }
            Ok(if result.failures.is_empty() { 0 } else { EXIT_ERROR })
        }
        Command::Bench { dataset, backend, json } => {
            let data = load_dataset(&dataset)?;
            let b: Box<dyn DetectorBackend> = match backend {
                BenchBackend::Baseline => Box::new(BaselineBackend::new(Arc::new(pipeline::build_engine(&cfg)?))),
                BenchBackend::GoldEcho => Box::new(GoldEchoBackend::new(&data)),
                BenchBackend::Remote => backend_for(&RunConfig { backend: BackendChoice::Remote, ..cfg.clone() })?,
            };
            let report = evaluate(b.as_ref(), &data, cfg.token_budget, &ByteHeuristic)?;
            if let Some(p) = json {
                std::fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
            }
            output(None, &render_table(std::slice::from_ref(&report)))?;
            Ok(0)
        }
        Command::Report { findings, out } => {
            let mut f: Vec<Finding> = read_jsonl(&findings)?;
            let out =
                out.unwrap_or_else(|| findings.parent().map(Path::to_path_buf).unwrap_or_default().join("report"));
            let stats = aggregate(&f);
            let paths = emit_reports(&mut f, &stats, &out)?;
            eprintln!("{} findings; summary in {}", stats.total, paths.summary_md.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
