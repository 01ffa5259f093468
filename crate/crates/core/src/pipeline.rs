//! End-to-end runs: ingest, comments, cleaning, reference graph, pattern
//! scans, image metadata, entity extraction and reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::categories;
use crate::classify::{
    api_key_from_env, classify_comments, BaselineBackend, DetectorBackend, RemoteBackend, RemoteConfigError,
    RemoteModelConfig, TranscriptCache,
};
use crate::clean::{clean_corpus, ByteHeuristic, CleanConfig, CleanStats};
use crate::comments::{
    assess_usability, extract_submission_comments, CommentRecord, CommentUsability, UsabilitySummary,
};
use crate::exif::{flag_image, read_exif};
use crate::ingest::{
    extract_bulk, extract_submission, paper_id_from_member, submission_dir_name, ExtractConfig, FileClass,
    FileClassTable, SubmissionRecord,
};
use crate::jsonl::JsonlWriter;
use crate::patterns::{
    default_rules, load_rules, sort_matches, Engine, RawMatch, RuleSet, ScanConfig, SuppressionList,
};
use crate::refgraph::{analyze_submission, Candidate, ReachabilityReport, RefgraphConfig};
use crate::report::{
    aggregate, emit_reports, finding_from_labels, findings_from_matches, AggregateStats, Finding, Severity, SeverityMap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Comments,
    Clean,
    Graph,
    Patterns,
    Exif,
    Classify,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Comments,
        Stage::Clean,
        Stage::Graph,
        Stage::Patterns,
        Stage::Exif,
        Stage::Classify,
        Stage::Report,
    ];

    fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Ingest | Stage::Report => &[],
            Stage::Comments | Stage::Graph | Stage::Exif => &[Stage::Ingest],
            Stage::Clean => &[Stage::Comments],
            Stage::Patterns => &[Stage::Comments, Stage::Graph],
            Stage::Classify => &[Stage::Clean],
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ingest" => Ok(Stage::Ingest),
            "comments" => Ok(Stage::Comments),
            "clean" => Ok(Stage::Clean),
            "graph" => Ok(Stage::Graph),
            "patterns" | "scan" => Ok(Stage::Patterns),
            "exif" => Ok(Stage::Exif),
            "classify" => Ok(Stage::Classify),
            "report" => Ok(Stage::Report),
            other => Err(format!("unknown stage `{other}`")),
        }
    }
}

/// `stages` closed under prerequisites. Reports are always produced.
pub fn resolve_stages(stages: &BTreeSet<Stage>) -> BTreeSet<Stage> {
    let mut out = BTreeSet::from([Stage::Report]);
    let mut todo: Vec<Stage> = stages.iter().copied().collect();
    while let Some(s) = todo.pop() {
        if out.insert(s) || s == Stage::Report {
            todo.extend(s.prerequisites());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Baseline,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub output: PathBuf,
    pub stages: BTreeSet<Stage>,
    pub backend: BackendChoice,
    pub parallelism: usize,
    /// Exit 1 when a finding at or above this severity exists.
    pub fail_on: Option<Severity>,
    /// Token budget per classification request.
    pub token_budget: u64,
    pub rules: Option<PathBuf>,
    pub severity_map: Option<PathBuf>,
    /// Extra suppression entries, added to the built-in list.
    pub suppressions: Option<PathBuf>,
    /// Where submissions are unpacked; a temporary directory when unset.
    pub work_dir: Option<PathBuf>,
    /// Remove image payloads after their metadata is read.
    pub delete_images: bool,
    /// Defaults to `transcripts.jsonl` in the output directory.
    pub transcript_cache: Option<PathBuf>,
    /// Candidate files larger than this are reported but not scanned.
    pub max_scan_bytes: u64,
    pub file_classes: BTreeMap<String, FileClass>,
    pub clean: CleanConfig,
    pub scan: ScanConfig,
    pub refgraph: RefgraphConfig,
    pub remote: RemoteModelConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: PathBuf::from("corpus"),
            output: PathBuf::from("out"),
            stages: Stage::ALL.into_iter().filter(|s| *s != Stage::Classify).collect(),
            backend: BackendChoice::Baseline,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            fail_on: None,
            token_budget: 8000,
            rules: None,
            severity_map: None,
            suppressions: None,
            work_dir: None,
            delete_images: false,
            transcript_cache: None,
            max_scan_bytes: 64 << 20,
            file_classes: BTreeMap::new(),
            clean: CleanConfig::default(),
            scan: ScanConfig::default(),
            refgraph: RefgraphConfig::default(),
            remote: RemoteModelConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Credential(#[from] RemoteConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Jsonl(#[from] crate::jsonl::JsonlError),
    #[error("backend: {0}")]
    Backend(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        Self::from_toml(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.parallelism == 0 {
            return Err(PipelineError::Config("parallelism must be at least 1".into()));
        }
        if self.token_budget == 0 {
            return Err(PipelineError::Config("token_budget must be positive".into()));
        }
        let same = match (self.corpus.canonicalize(), self.output.canonicalize()) {
            (Ok(a), Ok(b)) => a == b,
            _ => self.corpus == self.output,
        };
        if same {
            return Err(PipelineError::Config("output directory must differ from the corpus directory".into()));
        }
        self.clean.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.remote.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}

/// Compiled rules and suppressions from the configured files.
pub fn build_engine(config: &RunConfig) -> Result<Engine, PipelineError> {
    let loaded = match &config.rules {
        Some(path) => load_rules(path).map_err(|e| PipelineError::Config(e.to_string()))?,
        None => default_rules(),
    };
    for r in &loaded.rejected {
        log::warn!("rule `{}` rejected: {}", r.name, r.error.lines().next().unwrap_or(""));
    }
    let mut supp = SuppressionList::builtin();
    if let Some(path) = &config.suppressions {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        supp.extend(&text).map_err(|e| PipelineError::Config(e.to_string()))?;
    }
    Ok(Engine::new(RuleSet::compile(loaded.rules), supp, config.scan.clone()))
}

pub fn load_severity_map(config: &RunConfig) -> Result<SeverityMap, PipelineError> {
    match &config.severity_map {
        Some(p) => SeverityMap::load(p).map_err(|e| PipelineError::Config(e.to_string())),
        None => Ok(SeverityMap::default()),
    }
}

/// Unpacks or inventories every submission under `corpus`:
/// `*.tar.gz`/`*.tgz`/`*.gz` packages, `*.tar` bulk archives of packages,
/// bare `*.pdf` files, and already-unpacked directories. Sorted by id.
pub fn load_corpus(
    corpus: &Path,
    work: &Path,
    classes: &FileClassTable,
) -> Result<Vec<SubmissionRecord>, PipelineError> {
    let config = ExtractConfig { classes: classes.clone() };
    let mut entries: Vec<PathBuf> =
        std::fs::read_dir(corpus).map_err(io_err(corpus))?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    let mut packages = Vec::new();
    let mut records = Vec::new();
    for path in entries {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        if name.starts_with('.') {
            continue;
        }
        if path.is_dir() {
            records.push(SubmissionRecord::from_dir(&name, &path, classes).map_err(io_err(&path))?);
        } else if name.ends_with(".tar") {
            let f = File::open(&path).map_err(io_err(&path))?;
            records.extend(extract_bulk(BufReader::new(f), work, None, &config).map_err(io_err(&path))?);
        } else if let Some(id) = paper_id_from_member(&name) {
            packages.push((id, path));
        } else {
            log::info!("ignoring corpus entry {name}");
        }
    }
    let unpacked: Vec<Result<SubmissionRecord, PipelineError>> = packages
        .par_iter()
        .map(|(id, path)| {
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pdf")) {
                let root = work.join(submission_dir_name(id));
                std::fs::create_dir_all(&root).map_err(io_err(&root))?;
                let dest = root.join(path.file_name().expect("file has a name"));
                std::fs::copy(path, &dest).map_err(io_err(path))?;
                return SubmissionRecord::from_dir(id, &root, classes).map_err(io_err(&root));
            }
            let f = File::open(path).map_err(io_err(path))?;
            Ok(extract_submission(BufReader::new(f), id, work, &config))
        })
        .collect();
    for r in unpacked {
        records.push(r?);
    }
    records.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
    Ok(records)
}

const MODEL_WEIGHT_EXT: &[&str] = &["pt", "pth", "ckpt", "h5", "safetensors", "onnx", "pkl", "bin", "npz"];
const DOCUMENT_EXT: &[&str] = &["docx", "doc", "odt", "xlsx", "xls", "pptx", "ppt", "rtf"];
const CONFIG_EXT: &[&str] = &["env", "ini", "cfg", "conf", "yaml", "yml", "toml", "properties"];
const SQLITE_EXT: &[&str] = &["sqlite", "sqlite3", "db"];

fn extension(path: &str) -> String {
    let name = path.rsplit('/').next().unwrap_or(path);
    match name.rsplit_once('.') {
        Some(("", ext)) => ext.to_ascii_lowercase(),
        Some((_, ext)) => ext.to_ascii_lowercase(),
        None => String::new(),
    }
}

/// Category an unreferenced file falls under by its type, if any.
pub fn candidate_category(c: &Candidate) -> Option<&'static str> {
    let ext = extension(&c.path);
    let ext = ext.as_str();
    if SQLITE_EXT.contains(&ext) {
        Some(categories::SQLITE_DATABASES)
    } else if MODEL_WEIGHT_EXT.contains(&ext) {
        Some(categories::MODEL_WEIGHTS)
    } else if DOCUMENT_EXT.contains(&ext) {
        Some(categories::PRIVATE_DOCUMENTS)
    } else if CONFIG_EXT.contains(&ext) {
        Some(categories::CONFIG_FILES)
    } else if c.file_class == FileClass::Code {
        Some(categories::PRIVATE_SOURCE_CODE)
    } else {
        None
    }
}

fn looks_binary(bytes: &[u8]) -> bool {
    bytes.iter().take(8192).any(|b| *b == 0)
}

const IMAGE_EXT: &[&str] = &["jpg", "jpeg", "png", "tif", "tiff"];

/// What a run produced, for the caller and for `summary.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub stages: BTreeSet<Stage>,
    pub submissions: usize,
    pub comments: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usability: Option<UsabilitySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean: Option<CleanStats>,
    pub images_read: usize,
    pub classify_failures: usize,
    pub stats: AggregateStats,
    #[serde(skip)]
    pub findings: Vec<Finding>,
}

impl RunOutcome {
    /// 1 when `fail_on` is set and some finding is at least that severe.
    pub fn exit_code(&self, fail_on: Option<Severity>) -> i32 {
        match fail_on {
            Some(t) if self.findings.iter().any(|f| f.severity <= t) => 1,
            _ => 0,
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut s = serde_json::to_string_pretty(value).map_err(crate::jsonl::JsonlError::from)?;
    s.push('\n');
    std::fs::write(path, s).map_err(io_err(path))
}

/// The backend for `config`, or an error before any request is made when
/// the credential is missing.
pub fn make_backend(config: &RunConfig, engine: Arc<Engine>) -> Result<Box<dyn DetectorBackend>, PipelineError> {
    match config.backend {
        BackendChoice::Baseline => Ok(Box::new(BaselineBackend::new(engine))),
        BackendChoice::Remote => {
            let key = api_key_from_env()?;
            let cache_path = config.transcript_cache.clone().unwrap_or_else(|| config.output.join("transcripts.jsonl"));
            let cache = TranscriptCache::open(&cache_path)?;
            let remote = config.remote.clone().with_env_overrides();
            RemoteBackend::new(remote, key, Some(Arc::new(cache)))
                .map(|b| Box::new(b) as Box<dyn DetectorBackend>)
                .map_err(|e| PipelineError::Backend(e.to_string()))
        }
    }
}

/// Runs the configured stages and writes reports into `config.output`.
pub fn run(config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    run_with_backend(config, None)
}

/// As [`run`], with an explicit classification backend.
pub fn run_with_backend(
    config: &RunConfig,
    backend: Option<&dyn DetectorBackend>,
) -> Result<RunOutcome, PipelineError> {
    config.validate()?;
    let stages = resolve_stages(&config.stages);
    let engine = Arc::new(build_engine(config)?);
    let owned_backend = match (stages.contains(&Stage::Classify), backend) {
        (true, None) => Some(make_backend(config, engine.clone())?),
        _ => None,
    };
    let backend = backend.or(owned_backend.as_deref());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    pool.install(|| run_stages(config, &stages, &engine, backend))
}

fn run_stages(
    config: &RunConfig,
    stages: &BTreeSet<Stage>,
    engine: &Engine,
    backend: Option<&dyn DetectorBackend>,
) -> Result<RunOutcome, PipelineError> {
    let out = &config.output;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let severities = load_severity_map(config)?;
    let classes = FileClassTable::with_overrides(&config.file_classes);

    let temp;
    let work: &Path = match &config.work_dir {
        Some(w) => {
            std::fs::create_dir_all(w).map_err(io_err(w))?;
            w
        }
        None => {
            temp = tempfile::tempdir().map_err(io_err(Path::new("temporary directory")))?;
            temp.path()
        }
    };

    let records = load_corpus(&config.corpus, work, &classes)?;
    log::info!("{} submissions", records.len());
    {
        // Roots are stored relative to the work directory.
        let mut w = JsonlWriter::create(out.join("submissions.jsonl"))?;
        for r in &records {
            let mut r = r.clone();
            r.root_dir = PathBuf::from(submission_dir_name(&r.paper_id));
            w.write(&r)?;
        }
    }

    let mut comments: Vec<CommentRecord> = Vec::new();
    let mut usability = None;
    if stages.contains(&Stage::Comments) {
        let per: Vec<(Vec<CommentRecord>, CommentUsability)> = records
            .par_iter()
            .map(|r| {
                let c = extract_submission_comments(r);
                let u = assess_usability(r, &c);
                (c, u)
            })
            .collect();
        let statuses: Vec<CommentUsability> = per.iter().map(|(_, u)| u.clone()).collect();
        let summary = UsabilitySummary::from_statuses(&statuses);
        write_json(&out.join("usability.json"), &serde_json::json!({ "summary": summary, "papers": statuses }))?;
        usability = Some(summary);
        comments = per.into_iter().flat_map(|(c, _)| c).collect();
    }

    let mut clean_stats = None;
    let mut cleaned = Vec::new();
    if stages.contains(&Stage::Clean) {
        let (c, s) = clean_corpus(&comments, &config.clean, &ByteHeuristic);
        write_json(&out.join("clean_stats.json"), &s)?;
        clean_stats = Some(s);
        cleaned = c;
    }

    let mut graphs: Vec<ReachabilityReport> = Vec::new();
    if stages.contains(&Stage::Graph) {
        graphs = records.par_iter().map(|r| analyze_submission(r, &config.refgraph)).collect();
        let mut w = JsonlWriter::create(out.join("graph.jsonl"))?;
        for g in &graphs {
            w.write(g)?;
        }
    }

    let mut findings: Vec<Finding> = Vec::new();
    let mut url_hosts: Vec<String> = Vec::new();
    if stages.contains(&Stage::Patterns) {
        let mut matches: Vec<RawMatch> = engine.scan_comments(&comments);
        let by_id: BTreeMap<&str, &SubmissionRecord> = records.iter().map(|r| (r.paper_id.as_str(), r)).collect();
        let file_matches: Vec<Vec<RawMatch>> = graphs
            .par_iter()
            .flat_map_iter(|g| g.candidates.iter().map(move |c| (g, c)))
            .filter_map(|(g, c)| {
                let record = by_id.get(g.paper_id.as_str())?;
                if c.byte_size > config.max_scan_bytes || candidate_category(c) == Some(categories::SQLITE_DATABASES) {
                    return None;
                }
                let bytes = std::fs::read(record.root_dir.join(&c.path)).ok()?;
                (!looks_binary(&bytes)).then(|| engine.scan_file(&g.paper_id, &c.path, &bytes))
            })
            .collect();
        matches.extend(file_matches.into_iter().flatten());
        sort_matches(&mut matches);
        url_hosts.extend(matches.iter().filter(|m| m.rule_id == "url").filter_map(|m| m.host.clone()));
        findings.extend(findings_from_matches(&matches, &severities));
        for g in &graphs {
            for c in &g.candidates {
                if let Some(cat) = candidate_category(c) {
                    let rule = format!("lf.{}", extension(&c.path));
                    findings.push(Finding::for_file(&g.paper_id, cat, &c.path, &rule, &severities));
                }
            }
        }
    }

    let mut images_read = 0;
    if stages.contains(&Stage::Exif) {
        let per: Vec<(usize, Vec<Finding>)> = records
            .par_iter()
            .map(|r| {
                let mut n = 0;
                let mut f = Vec::new();
                for e in &r.files {
                    if !IMAGE_EXT.contains(&extension(&e.path).as_str()) {
                        continue;
                    }
                    let abs = r.absolute(e);
                    let Ok(bytes) = std::fs::read(&abs) else { continue };
                    if let Ok(meta) = read_exif(&bytes, &e.path) {
                        n += 1;
                        f.extend(flag_image(&meta, &r.paper_id, &severities));
                    }
                    if config.delete_images {
                        if let Err(err) = std::fs::remove_file(&abs) {
                            log::warn!("removing {}: {err}", abs.display());
                        }
                    }
                }
                (n, f)
            })
            .collect();
        for (n, f) in per {
            images_read += n;
            findings.extend(f);
        }
    }

    let mut classify_failures = 0;
    if stages.contains(&Stage::Classify) {
        let backend = backend.ok_or_else(|| PipelineError::Backend("no classification backend".into()))?;
        let result = classify_comments(backend, &cleaned, config.token_budget, &ByteHeuristic);
        classify_failures = result.failures.len();
        for p in &result.predictions {
            let text = &cleaned[p.index].normalized;
            findings.extend(finding_from_labels(p.locus.clone(), text, &p.labels, &result.backend, &severities));
        }
        write_json(
            &out.join("classify.json"),
            &serde_json::json!({
                "backend": result.backend,
                "snippets": cleaned.len(),
                "predictions": result.predictions.len(),
                "flagged": result.predictions.iter().filter(|p| !p.labels.is_other()).count(),
                "prompt_tokens": result.prompt_tokens,
                "failures": result.failures,
            }),
        )?;
    }

    let stats = aggregate(&findings).with_url_census(url_hosts.iter().map(String::as_str));
    emit_reports(&mut findings, &stats, out)?;
    Ok(RunOutcome {
        stages: stages.clone(),
        submissions: records.len(),
        comments: comments.len(),
        usability,
        clean: clean_stats,
        images_read,
        classify_failures,
        stats,
        findings,
    })
}
