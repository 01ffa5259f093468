//! File-inclusion graph of a submission and the files no compiled document
//! ever pulls in.
//!
//! Directives are found lexically in comment-masked text. Resolution tries
//! the submission root first, then the including file's directory; for
//! graphics each `\graphicspath` entry is tried as well.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comments::{decode_source, lex};
use crate::ingest::{FileClass, SubmissionRecord};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReferenceEdge {
    pub from: String,
    pub to: String,
    pub directive: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnresolvedReference {
    pub from: String,
    pub directive: String,
    pub argument: String,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedReferences {
    pub edges: Vec<ReferenceEdge>,
    pub unresolved: Vec<UnresolvedReference>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefgraphConfig {
    /// Lowercase extensions, without the dot, never reported as candidates.
    pub excluded_extensions: Vec<String>,
    pub excluded_classes: Vec<FileClass>,
}

impl Default for RefgraphConfig {
    fn default() -> Self {
        RefgraphConfig {
            excluded_extensions: ["eps", "bib", "bbl", "pygtex", "pygstyle"].map(String::from).to_vec(),
            excluded_classes: vec![FileClass::Graphic, FileClass::Bib, FileClass::Style],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub path: String,
    pub file_class: FileClass,
    pub byte_size: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilityReport {
    pub paper_id: String,
    pub roots: Vec<String>,
    pub reachable: BTreeSet<String>,
    pub unreferenced: BTreeSet<String>,
    pub candidates: Vec<Candidate>,
    pub edges: Vec<ReferenceEdge>,
    pub unresolved: Vec<UnresolvedReference>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Lookup {
    /// Exact name, then `.tex`, then graphics extensions.
    Tex,
    Graphic,
    Fixed(&'static str),
    /// Only meaningful when a local file exists; silence otherwise.
    LocalOnly(&'static str),
    Exact,
}

const TEX_ORDER: &[&str] = &["", ".tex", ".pdf", ".png", ".jpg", ".jpeg", ".eps"];

impl Lookup {
    fn suffixes(self) -> Vec<&'static str> {
        match self {
            Lookup::Tex | Lookup::Graphic => TEX_ORDER.to_vec(),
            Lookup::Fixed(ext) | Lookup::LocalOnly(ext) => vec!["", ext],
            Lookup::Exact => vec![""],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Base {
    /// Submission root, then the including file's directory.
    Default,
    Root(String),
    IncludingFile(String),
}

/// One argument requesting a file, before resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Request {
    directive: &'static str,
    argument: String,
    base: Base,
    lookup: Lookup,
    line: usize,
}

/// Inventory paths as a set, for lookups.
pub struct Inventory {
    paths: HashSet<String>,
}

impl Inventory {
    pub fn new<'a>(paths: impl IntoIterator<Item = &'a str>) -> Self {
        Inventory { paths: paths.into_iter().map(str::to_string).collect() }
    }

    pub fn contains(&self, path: &str) -> bool {
        self.paths.contains(path)
    }
}

/// Joins `rel` onto `base` and collapses `.` and `..`. `None` if the result
/// would leave the submission root.
pub fn join_normalized(base: &str, rel: &str) -> Option<String> {
    let mut parts: Vec<&str> = Vec::new();
    let rel = rel.trim_start_matches("./");
    let start = if rel.starts_with('/') { "" } else { base };
    for seg in start.split('/').chain(rel.split('/')) {
        match seg {
            "" | "." => {}
            ".." => {
                parts.pop()?;
            }
            s => parts.push(s),
        }
    }
    Some(parts.join("/"))
}

fn parent_dir(path: &str) -> &str {
    path.rsplit_once('/').map_or("", |(d, _)| d)
}

struct Scanner<'a> {
    text: &'a str,
    bytes: &'a [u8],
    line_starts: Vec<usize>,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.bytes().enumerate().filter(|(_, b)| *b == b'\n').map(|(i, _)| i + 1));
        Scanner { text, bytes: text.as_bytes(), line_starts }
    }

    fn line_of(&self, at: usize) -> usize {
        self.line_starts.partition_point(|&s| s <= at)
    }

    fn skip_space(&self, mut i: usize) -> usize {
        while i < self.bytes.len() && self.bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        i
    }

    /// Parses a balanced `open ... close` group at `i` (after whitespace).
    fn group(&self, i: usize, open: u8, close: u8) -> Option<(&'a str, usize)> {
        let i = self.skip_space(i);
        if self.bytes.get(i) != Some(&open) {
            return None;
        }
        let mut depth = 0usize;
        for (k, &b) in self.bytes[i..].iter().enumerate() {
            if b == open {
                depth += 1;
            } else if b == close {
                depth -= 1;
                if depth == 0 {
                    return Some((&self.text[i + 1..i + k], i + k + 1));
                }
            }
        }
        None
    }

    fn skip_optionals(&self, mut i: usize) -> usize {
        let j = self.skip_space(i);
        if self.bytes.get(j) == Some(&b'*') {
            i = j + 1;
        }
        while let Some((_, next)) = self.group(i, b'[', b']') {
            i = next;
        }
        i
    }

    /// Plain-TeX `\input name`, terminated by whitespace or a brace.
    fn bare_word(&self, i: usize) -> Option<(&'a str, usize)> {
        let start = self.skip_space(i);
        let len = self.bytes[start..]
            .iter()
            .position(|b| b.is_ascii_whitespace() || matches!(b, b'{' | b'}' | b'\\' | b'%'))
            .unwrap_or(self.bytes.len() - start);
        (len > 0).then(|| (&self.text[start..start + len], start + len))
    }
}

fn split_list(arg: &str) -> impl Iterator<Item = String> + '_ {
    arg.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string)
}

/// Directive requests and `\graphicspath` entries of one masked source.
fn scan(masked: &str) -> (Vec<Request>, Vec<String>) {
    let sc = Scanner::new(masked);
    let bytes = sc.bytes;
    let mut reqs = Vec::new();
    let mut graphic_dirs = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\\' {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < bytes.len() && bytes[j].is_ascii_alphabetic() {
            j += 1;
        }
        if j == i + 1 {
            i += 2;
            continue;
        }
        let word = &masked[i + 1..j];
        let line = sc.line_of(i);
        let mut push = |directive: &'static str, argument: String, base: Base, lookup: Lookup| {
            reqs.push(Request { directive, argument, base, lookup, line });
        };
        let after_opt = sc.skip_optionals(j);
        match word {
            "input" | "include" | "subfile" | "InputIfFileExists" => {
                let d: &'static str = match word {
                    "input" => "input",
                    "include" => "include",
                    "subfile" => "subfile",
                    _ => "InputIfFileExists",
                };
                if let Some((arg, next)) = sc.group(j, b'{', b'}') {
                    push(d, arg.trim().to_string(), Base::Default, Lookup::Tex);
                    i = next;
                    continue;
                }
                if word == "input" {
                    if let Some((arg, next)) = sc.bare_word(j) {
                        push("input", arg.to_string(), Base::Default, Lookup::Tex);
                        i = next;
                        continue;
                    }
                }
            }
            "import" | "subimport" | "inputfrom" | "subinputfrom" | "includefrom" | "subincludefrom" => {
                if let Some((dir, n1)) = sc.group(j, b'{', b'}') {
                    if let Some((file, n2)) = sc.group(n1, b'{', b'}') {
                        let d: &'static str = if word.starts_with("sub") { "subimport" } else { "import" };
                        let mut dir = dir.trim().to_string();
                        if !dir.is_empty() && !dir.ends_with('/') {
                            dir.push('/');
                        }
                        let base = if d == "subimport" { Base::IncludingFile(dir) } else { Base::Root(dir) };
                        push(d, file.trim().to_string(), base, Lookup::Tex);
                        i = n2;
                        continue;
                    }
                }
            }
            "includegraphics" => {
                if let Some((arg, next)) = sc.group(after_opt, b'{', b'}') {
                    push("includegraphics", arg.trim().to_string(), Base::Default, Lookup::Graphic);
                    i = next;
                    continue;
                }
            }
            "graphicspath" => {
                if let Some((arg, next)) = sc.group(j, b'{', b'}') {
                    let inner = Scanner::new(arg);
                    let mut k = 0;
                    while let Some((dir, n)) = inner.group(k, b'{', b'}') {
                        graphic_dirs.push(dir.trim().to_string());
                        k = n;
                    }
                    i = next;
                    continue;
                }
            }
            "bibliography" | "nobibliography" => {
                if let Some((arg, next)) = sc.group(j, b'{', b'}') {
                    for a in split_list(arg) {
                        push("bibliography", a, Base::Default, Lookup::Fixed(".bib"));
                    }
                    i = next;
                    continue;
                }
            }
            "addbibresource" | "addglobalbib" => {
                if let Some((arg, next)) = sc.group(after_opt, b'{', b'}') {
                    push("addbibresource", arg.trim().to_string(), Base::Default, Lookup::Exact);
                    i = next;
                    continue;
                }
            }
            "bibliographystyle" => {
                if let Some((arg, next)) = sc.group(j, b'{', b'}') {
                    push("bibliographystyle", arg.trim().to_string(), Base::Default, Lookup::LocalOnly(".bst"));
                    i = next;
                    continue;
                }
            }
            "includepdf" => {
                if let Some((arg, next)) = sc.group(after_opt, b'{', b'}') {
                    push("includepdf", arg.trim().to_string(), Base::Default, Lookup::Fixed(".pdf"));
                    i = next;
                    continue;
                }
            }
            "lstinputlisting" | "verbatiminput" | "inputminted" | "VerbatimInput" | "includesvg" => {
                let d: &'static str = match word {
                    "lstinputlisting" => "lstinputlisting",
                    "verbatiminput" => "verbatiminput",
                    "inputminted" => "inputminted",
                    "VerbatimInput" => "VerbatimInput",
                    _ => "includesvg",
                };
                let mut at = after_opt;
                if d == "inputminted" {
                    // \inputminted{lang}{file}
                    if let Some((_, n)) = sc.group(at, b'{', b'}') {
                        at = n;
                    }
                }
                if let Some((arg, next)) = sc.group(at, b'{', b'}') {
                    let lookup = if d == "includesvg" { Lookup::Fixed(".svg") } else { Lookup::Exact };
                    push(d, arg.trim().to_string(), Base::Default, lookup);
                    i = next;
                    continue;
                }
            }
            "usepackage" | "RequirePackage" => {
                if let Some((arg, next)) = sc.group(after_opt, b'{', b'}') {
                    for a in split_list(arg) {
                        push("usepackage", a, Base::Default, Lookup::LocalOnly(".sty"));
                    }
                    i = next;
                    continue;
                }
            }
            "documentclass" | "LoadClass" => {
                if let Some((arg, next)) = sc.group(after_opt, b'{', b'}') {
                    push("documentclass", arg.trim().to_string(), Base::Default, Lookup::LocalOnly(".cls"));
                    i = next;
                    continue;
                }
            }
            _ => {}
        }
        i = j;
    }
    (reqs, graphic_dirs)
}

fn resolve(req: &Request, from: &str, graphic_dirs: &[String], inv: &Inventory) -> Result<String, String> {
    let arg = req.argument.trim_matches('"');
    if arg.is_empty() {
        return Err("empty argument".into());
    }
    if arg.contains('\\') || arg.contains('#') {
        return Err("argument contains a macro".into());
    }
    let from_dir = parent_dir(from);
    let mut bases: Vec<String> = match &req.base {
        Base::IncludingFile(d) => vec![join_normalized(from_dir, d).unwrap_or_default()],
        Base::Root(d) => vec![d.clone()],
        Base::Default => vec![String::new(), from_dir.to_string()],
    };
    if req.lookup == Lookup::Graphic {
        let extra: Vec<String> =
            graphic_dirs.iter().flat_map(|g| [g.clone(), join_normalized(from_dir, g).unwrap_or_default()]).collect();
        bases.extend(extra);
    }
    bases.dedup();
    let mut escaped = false;
    for suffix in req.lookup.suffixes() {
        for base in &bases {
            let Some(p) = join_normalized(base, &format!("{arg}{suffix}")) else {
                escaped = true;
                continue;
            };
            if inv.contains(&p) {
                return Ok(p);
            }
        }
    }
    Err(if escaped { "path leaves the submission root".into() } else { "no such file in submission".into() })
}

/// Resolves every file reference of one source. `source` may be raw; comment
/// and verbatim regions are masked before scanning.
pub fn parse_references(source: &str, file: &str, inventory: &Inventory) -> ParsedReferences {
    let masked = lex(source).masked();
    let (reqs, dirs) = scan(&masked);
    resolve_all(file, &reqs, &dirs, inventory)
}

fn resolve_all(file: &str, reqs: &[Request], graphic_dirs: &[String], inv: &Inventory) -> ParsedReferences {
    let mut out = ParsedReferences::default();
    for req in reqs {
        match resolve(req, file, graphic_dirs, inv) {
            Ok(to) => {
                out.edges.push(ReferenceEdge { from: file.to_string(), to, directive: req.directive.to_string() })
            }
            Err(_) if matches!(req.lookup, Lookup::LocalOnly(_)) => {}
            Err(reason) => {
                log::debug!("{file}:{}: unresolved \\{}{{{}}}: {reason}", req.line, req.directive, req.argument);
                out.unresolved.push(UnresolvedReference {
                    from: file.to_string(),
                    directive: req.directive.to_string(),
                    argument: req.argument.clone(),
                    line: req.line,
                    reason,
                });
            }
        }
    }
    out
}

/// Transitive closure from `roots` over `edges`.
pub fn reachable_from<'a>(roots: impl IntoIterator<Item = &'a str>, edges: &[ReferenceEdge]) -> BTreeSet<String> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in edges {
        adj.entry(e.from.as_str()).or_default().push(e.to.as_str());
    }
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut queue: VecDeque<&str> = roots.into_iter().collect();
    while let Some(n) = queue.pop_front() {
        if !seen.insert(n.to_string()) {
            continue;
        }
        if let Some(next) = adj.get(n) {
            queue.extend(next.iter().copied().filter(|m| !seen.contains(*m)));
        }
    }
    seen
}

fn extension(path: &str) -> String {
    Path::new(path).extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

/// Builds the graph of a submission on disk and reports the unreferenced
/// files.
pub fn analyze_submission(record: &SubmissionRecord, config: &RefgraphConfig) -> ReachabilityReport {
    let inv = Inventory::new(record.files.iter().map(|f| f.path.as_str()));
    let mut scanned: Vec<(String, Vec<Request>, bool)> = Vec::new();
    let mut graphic_dirs = Vec::new();
    for entry in record.files_of(FileClass::Tex) {
        let bytes = match std::fs::read(record.absolute(entry)) {
            Ok(b) => b,
            Err(e) => {
                log::warn!("{}/{}: {e}", record.paper_id, entry.path);
                continue;
            }
        };
        let (text, _) = decode_source(&bytes);
        let masked = lex(&text).masked();
        let (reqs, dirs) = scan(&masked);
        let has_class = reqs.iter().any(|r| r.directive == "documentclass");
        graphic_dirs.extend(dirs);
        scanned.push((entry.path.clone(), reqs, has_class));
    }
    // \graphicspath is document-global, so entries from every file apply.
    let mut parsed = ParsedReferences::default();
    for (file, reqs, _) in &scanned {
        let p = resolve_all(file, reqs, &graphic_dirs, &inv);
        parsed.edges.extend(p.edges);
        parsed.unresolved.extend(p.unresolved);
    }

    let mut roots: Vec<String> = scanned.iter().filter(|(_, _, c)| *c).map(|(f, _, _)| f.clone()).collect();
    if roots.is_empty() {
        if let Some(largest) =
            record.files_of(FileClass::Tex).max_by(|a, b| a.byte_size.cmp(&b.byte_size).then(b.path.cmp(&a.path)))
        {
            log::info!("{}: no \\documentclass; using largest tex file {} as root", record.paper_id, largest.path);
            roots.push(largest.path.clone());
        }
    }
    // The engine writes <jobname>.bbl next to each root and reads it back.
    for root in &roots {
        let bbl = format!("{}.bbl", root.strip_suffix(".tex").unwrap_or(root));
        if inv.contains(&bbl) {
            parsed.edges.push(ReferenceEdge { from: root.clone(), to: bbl, directive: "bibliography".into() });
        }
    }
    parsed.edges.sort();
    parsed.edges.dedup();
    compute_unreferenced(record, &roots, parsed, config)
}

pub fn compute_unreferenced(
    record: &SubmissionRecord,
    roots: &[String],
    parsed: ParsedReferences,
    config: &RefgraphConfig,
) -> ReachabilityReport {
    let reachable = reachable_from(roots.iter().map(String::as_str), &parsed.edges);
    let unreferenced: BTreeSet<String> =
        record.files.iter().map(|f| f.path.clone()).filter(|p| !reachable.contains(p)).collect();
    let candidates = record
        .files
        .iter()
        .filter(|f| unreferenced.contains(&f.path))
        .filter(|f| !config.excluded_classes.contains(&f.file_class))
        .filter(|f| !config.excluded_extensions.iter().any(|e| e.trim_start_matches('.') == extension(&f.path)))
        .map(|f| Candidate { path: f.path.clone(), file_class: f.file_class, byte_size: f.byte_size })
        .collect();
    ReachabilityReport {
        paper_id: record.paper_id.clone(),
        roots: roots.to_vec(),
        reachable: reachable.into_iter().filter(|p| record.file(p).is_some()).collect(),
        unreferenced,
        candidates,
        edges: parsed.edges,
        unresolved: parsed.unresolved,
    }
}
