//! Unpacking of per-paper source packages.
//!
//! A package arrives gzip-compressed and holds either a tar container or one
//! bare file (usually TeX, sometimes a PDF). The decompressed stream is
//! probed for a tar header before deciding which.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufRead, BufReader, Cursor, Read};
use std::path::{Component, Path, PathBuf};

use flate2::read::GzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classes::{FileClass, FileClassTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubmissionKind {
    LatexSource,
    PdfOnly,
    NoSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the submission root, `/`-separated.
    pub path: String,
    pub byte_size: u64,
    pub file_class: FileClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub paper_id: String,
    pub kind: SubmissionKind,
    pub root_dir: PathBuf,
    pub files: Vec<FileEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl SubmissionRecord {
    pub fn file(&self, path: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn files_of(&self, class: FileClass) -> impl Iterator<Item = &FileEntry> {
        self.files.iter().filter(move |f| f.file_class == class)
    }

    pub fn absolute(&self, entry: &FileEntry) -> PathBuf {
        self.root_dir.join(&entry.path)
    }

    /// Inventories an already-unpacked directory.
    pub fn from_dir(paper_id: &str, root: &Path, classes: &FileClassTable) -> io::Result<Self> {
        let files = inventory(root, classes)?;
        let mut record = SubmissionRecord {
            paper_id: paper_id.to_string(),
            kind: SubmissionKind::NoSource,
            root_dir: root.to_path_buf(),
            files,
            diagnostics: Vec::new(),
        };
        record.kind = classify_submission(&record);
        Ok(record)
    }
}

/// tex present → latex-source; otherwise a PDF → pdf-only; otherwise nothing usable.
pub fn classify_submission(record: &SubmissionRecord) -> SubmissionKind {
    if record.files.iter().any(|f| f.file_class == FileClass::Tex) {
        SubmissionKind::LatexSource
    } else if record.files.iter().any(|f| f.file_class == FileClass::Pdf) {
        SubmissionKind::PdfOnly
    } else {
        SubmissionKind::NoSource
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExtractConfig {
    pub classes: FileClassTable,
}

#[derive(Debug, thiserror::Error)]
enum ExtractFailure {
    #[error("corrupt gzip stream: {0}")]
    Gzip(io::Error),
    #[error("corrupt tar container: {0}")]
    Tar(io::Error),
    #[error("writing extracted file: {0}")]
    Write(io::Error),
}

/// Maps a paper id onto a single safe directory name (`hep-th/9901001` →
/// `hep-th_9901001`).
pub fn submission_dir_name(paper_id: &str) -> String {
    let name: String = paper_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    match name.trim_matches('.') {
        "" => "_".to_string(),
        _ => name,
    }
}

/// Normalizes an archive member name to a relative `/`-separated path.
/// Absolute names and any `..` component are rejected outright.
pub fn normalize_member_path(name: &str) -> Result<String, String> {
    if name.contains('\0') {
        return Err(format!("member name contains NUL: {name:?}"));
    }
    let unified = name.replace('\\', "/");
    if unified.starts_with('/') || has_drive_prefix(&unified) {
        return Err(format!("absolute member path rejected: {name:?}"));
    }
    let mut parts = Vec::new();
    for comp in Path::new(&unified).components() {
        match comp {
            Component::Normal(p) => parts.push(p.to_string_lossy().into_owned()),
            Component::CurDir => {}
            Component::ParentDir => return Err(format!("path traversal rejected: {name:?}")),
            Component::RootDir | Component::Prefix(_) => {
                return Err(format!("absolute member path rejected: {name:?}"))
            }
        }
    }
    Ok(parts.join("/"))
}

fn has_drive_prefix(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() >= 2 && b[0].is_ascii_alphabetic() && b[1] == b':'
}

fn is_tar_header(block: &[u8]) -> bool {
    if block.len() < 512 {
        return false;
    }
    if block[..512].iter().all(|&b| b == 0) {
        return true;
    }
    if &block[257..262] == b"ustar" {
        return true;
    }
    let stored = std::str::from_utf8(&block[148..156])
        .ok()
        .map(|s| s.trim_matches(|c: char| c == '\0' || c == ' '))
        .and_then(|s| u32::from_str_radix(s, 8).ok());
    let Some(stored) = stored else { return false };
    let sum: u32 = block[..512]
        .iter()
        .enumerate()
        .map(|(i, &b)| if (148..156).contains(&i) { u32::from(b' ') } else { u32::from(b) })
        .sum();
    sum == stored
}

fn read_up_to(reader: &mut impl Read, n: usize) -> io::Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(n);
    reader.take(n as u64).read_to_end(&mut buf)?;
    Ok(buf)
}

/// Unpacks one package into `out_root/<paper id>/`, replacing anything that
/// was there, and returns the inventory. Failures never escape: a corrupt
/// package yields an empty `no-source` record carrying the diagnostic.
pub fn extract_submission(
    input: impl Read,
    paper_id: &str,
    out_root: &Path,
    config: &ExtractConfig,
) -> SubmissionRecord {
    let root = out_root.join(submission_dir_name(paper_id));
    let mut diagnostics = Vec::new();
    let outcome =
        reset_dir(&root).map_err(ExtractFailure::Write).and_then(|_| unpack(input, paper_id, &root, &mut diagnostics));
    if let Err(err) = outcome {
        log::warn!("{paper_id}: {err}");
        diagnostics.push(err.to_string());
        if let Err(e) = reset_dir(&root) {
            diagnostics.push(format!("cleaning root: {e}"));
        }
    }
    let files = match inventory(&root, &config.classes) {
        Ok(files) => files,
        Err(e) => {
            diagnostics.push(format!("inventory: {e}"));
            Vec::new()
        }
    };
    let mut record = SubmissionRecord {
        paper_id: paper_id.to_string(),
        kind: SubmissionKind::NoSource,
        root_dir: root,
        files,
        diagnostics,
    };
    record.kind = classify_submission(&record);
    record
}

fn reset_dir(root: &Path) -> io::Result<()> {
    if root.exists() {
        fs::remove_dir_all(root)?;
    }
    fs::create_dir_all(root)
}

fn unpack(input: impl Read, paper_id: &str, root: &Path, diagnostics: &mut Vec<String>) -> Result<(), ExtractFailure> {
    let mut input = BufReader::new(input);
    let head = input.fill_buf().map_err(ExtractFailure::Gzip)?;
    let gzipped = head.starts_with(&[0x1f, 0x8b]);

    if gzipped {
        let mut gz = GzDecoder::new(input);
        let block = read_up_to(&mut gz, 512).map_err(ExtractFailure::Gzip)?;
        let header_name = gz.header().and_then(|h| h.filename()).map(|n| String::from_utf8_lossy(n).into_owned());
        unpack_payload(block, gz, header_name, paper_id, root, diagnostics)
    } else {
        let block = read_up_to(&mut input, 512).map_err(ExtractFailure::Gzip)?;
        unpack_payload(block, input, None, paper_id, root, diagnostics)
    }
}

fn unpack_payload(
    block: Vec<u8>,
    rest: impl Read,
    header_name: Option<String>,
    paper_id: &str,
    root: &Path,
    diagnostics: &mut Vec<String>,
) -> Result<(), ExtractFailure> {
    if is_tar_header(&block) {
        let mut archive = tar::Archive::new(Cursor::new(block).chain(rest));
        return unpack_tar(&mut archive, root, diagnostics);
    }
    let name = bare_file_name(&block, header_name.as_deref(), paper_id);
    let mut out = block;
    let mut rest = rest;
    rest.read_to_end(&mut out).map_err(ExtractFailure::Gzip)?;
    if out.is_empty() {
        diagnostics.push("empty payload".to_string());
        return Ok(());
    }
    fs::write(root.join(name), out).map_err(ExtractFailure::Write)
}

fn bare_file_name(head: &[u8], header_name: Option<&str>, paper_id: &str) -> String {
    if let Some(name) = header_name {
        if let Ok(norm) = normalize_member_path(name) {
            if let Some(base) = norm.rsplit('/').next().filter(|b| b.contains('.')) {
                return base.to_string();
            }
        }
    }
    if head.starts_with(b"%PDF") {
        format!("{}.pdf", submission_dir_name(paper_id))
    } else {
        "main.tex".to_string()
    }
}

fn unpack_tar<R: Read>(
    archive: &mut tar::Archive<R>,
    root: &Path,
    diagnostics: &mut Vec<String>,
) -> Result<(), ExtractFailure> {
    for entry in archive.entries().map_err(ExtractFailure::Tar)? {
        let mut entry = entry.map_err(ExtractFailure::Tar)?;
        let raw_name = String::from_utf8_lossy(&entry.path_bytes()).into_owned();
        let kind = entry.header().entry_type();
        let rel = match normalize_member_path(&raw_name) {
            Ok(rel) => rel,
            Err(reason) => {
                log::warn!("{reason}");
                diagnostics.push(reason);
                continue;
            }
        };
        if rel.is_empty() {
            continue;
        }
        let dest = root.join(&rel);
        if kind.is_dir() {
            fs::create_dir_all(&dest).map_err(ExtractFailure::Write)?;
            continue;
        }
        if !kind.is_file() {
            diagnostics.push(format!("skipped non-regular member {raw_name:?} ({kind:?})"));
            continue;
        }
        if let Some(parent) = dest.parent() {
            if parent.is_file() {
                diagnostics.push(format!("member {raw_name:?} nested under a file; skipped"));
                continue;
            }
            fs::create_dir_all(parent).map_err(ExtractFailure::Write)?;
        }
        if dest.is_dir() {
            diagnostics.push(format!("member {raw_name:?} collides with a directory; skipped"));
            continue;
        }
        let mut buf = Vec::with_capacity(entry.size() as usize);
        entry.read_to_end(&mut buf).map_err(ExtractFailure::Tar)?;
        fs::write(&dest, buf).map_err(ExtractFailure::Write)?;
    }
    Ok(())
}

/// Sorted listing of every regular file below `root`. Symlinks are not
/// followed.
pub fn inventory(root: &Path, classes: &FileClassTable) -> io::Result<Vec<FileEntry>> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let entry = entry?;
            let ty = entry.file_type()?;
            let path = entry.path();
            if ty.is_dir() {
                stack.push(path);
            } else if ty.is_file() {
                let rel = path
                    .strip_prefix(root)
                    .expect("walk stays under root")
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join("/");
                let class = classes.classify(Path::new(&rel));
                files.push(FileEntry { path: rel, byte_size: entry.metadata()?.len(), file_class: class });
            }
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}

/// Paper id for a member of a bulk archive (`2301/2301.00001.gz` → `2301.00001`).
pub fn paper_id_from_member(name: &str) -> Option<String> {
    let base = name.replace('\\', "/");
    let base = base.rsplit('/').next()?;
    for suffix in [".tar.gz", ".tgz", ".gz", ".pdf"] {
        if let Some(stem) = base.strip_suffix(suffix) {
            if !stem.is_empty() {
                return Some(stem.to_string());
            }
        }
    }
    None
}

/// Streams a bulk tar of per-paper packages and unpacks the wanted ones in
/// parallel. Members are buffered in groups so that decompression of the
/// outer stream overlaps with per-paper extraction.
pub fn extract_bulk(
    bulk: impl Read,
    out_root: &Path,
    wanted: Option<&BTreeSet<String>>,
    config: &ExtractConfig,
) -> io::Result<Vec<SubmissionRecord>> {
    const GROUP: usize = 32;
    let mut records = Vec::new();
    let mut pending: Vec<(String, Vec<u8>)> = Vec::with_capacity(GROUP);
    let mut archive = tar::Archive::new(bulk);
    let flush = |pending: &mut Vec<(String, Vec<u8>)>, records: &mut Vec<SubmissionRecord>| {
        let done: Vec<SubmissionRecord> = pending
            .par_drain(..)
            .map(|(id, bytes)| extract_submission(Cursor::new(bytes), &id, out_root, config))
            .collect();
        records.extend(done);
    };
    for entry in archive.entries()? {
        let mut entry = entry?;
        if !entry.header().entry_type().is_file() {
            continue;
        }
        let name = String::from_utf8_lossy(&entry.path_bytes()).into_owned();
        let Some(id) = paper_id_from_member(&name) else { continue };
        if wanted.is_some_and(|w| !w.contains(&id)) {
            continue;
        }
        let mut bytes = Vec::with_capacity(entry.size() as usize);
        entry.read_to_end(&mut bytes)?;
        pending.push((id, bytes));
        if pending.len() == GROUP {
            flush(&mut pending, &mut records);
        }
    }
    flush(&mut pending, &mut records);
    records.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use std::io::Write;

    fn tar_gz(members: &[(&str, &[u8])]) -> Vec<u8> {
        let mut builder = tar::Builder::new(GzEncoder::new(Vec::new(), Compression::default()));
        for (name, data) in members {
            let mut header = tar::Header::new_gnu();
            header.set_size(data.len() as u64);
            header.set_mode(0o644);
            header.set_cksum();
            builder.append_data(&mut header, name, *data).unwrap();
        }
        builder.into_inner().unwrap().finish().unwrap()
    }

    fn gz(data: &[u8]) -> Vec<u8> {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(data).unwrap();
        enc.finish().unwrap()
    }

    #[test]
    fn tar_with_tex_and_figure() {
        let dir = tempfile::tempdir().unwrap();
        let bytes = tar_gz(&[("main.tex", b"\\documentclass{article}"), ("fig.png", b"\x89PNG")]);
        let rec = extract_submission(Cursor::new(bytes), "2301.00001", dir.path(), &ExtractConfig::default());
        assert_eq!(rec.kind, SubmissionKind::LatexSource);
        assert_eq!(rec.files.len(), 2);
        assert_eq!(rec.files[0].path, "fig.png");
        assert_eq!(rec.files[0].file_class, FileClass::Graphic);
    }

    #[test]
    fn bare_gzipped_tex() {
        let dir = tempfile::tempdir().unwrap();
        let rec = extract_submission(
            Cursor::new(gz(b"\\documentclass{article}\n% hi\n")),
            "p",
            dir.path(),
            &ExtractConfig::default(),
        );
        assert_eq!(rec.kind, SubmissionKind::LatexSource);
        assert_eq!(rec.files.len(), 1);
        assert_eq!(rec.files[0].path, "main.tex");
    }

    #[test]
    fn pdf_only_archive() {
        let dir = tempfile::tempdir().unwrap();
        let bytes = tar_gz(&[("paper.pdf", b"%PDF-1.5 ...")]);
        let rec = extract_submission(Cursor::new(bytes), "p", dir.path(), &ExtractConfig::default());
        assert_eq!(rec.kind, SubmissionKind::PdfOnly);
    }

    #[test]
    fn bare_gzipped_pdf() {
        let dir = tempfile::tempdir().unwrap();
        let rec =
            extract_submission(Cursor::new(gz(b"%PDF-1.4 body")), "2301.5", dir.path(), &ExtractConfig::default());
        assert_eq!(rec.kind, SubmissionKind::PdfOnly);
        assert_eq!(rec.files[0].path, "2301.5.pdf");
    }

    #[test]
    fn corrupt_gzip_is_no_source() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = tar_gz(&[("main.tex", &[b'a'; 4000])]);
        let n = bytes.len();
        bytes.truncate(n / 2);
        bytes.extend_from_slice(&[0xff; 64]);
        let rec = extract_submission(Cursor::new(bytes), "p", dir.path(), &ExtractConfig::default());
        assert_eq!(rec.kind, SubmissionKind::NoSource);
        assert!(rec.files.is_empty());
        assert!(!rec.diagnostics.is_empty());
    }

    #[test]
    fn classify_examples() {
        let mk = |files: Vec<(&str, FileClass)>| SubmissionRecord {
            paper_id: "p".into(),
            kind: SubmissionKind::NoSource,
            root_dir: PathBuf::new(),
            files: files.into_iter().map(|(p, c)| FileEntry { path: p.into(), byte_size: 1, file_class: c }).collect(),
            diagnostics: vec![],
        };
        assert_eq!(classify_submission(&mk(vec![("main.tex", FileClass::Tex)])), SubmissionKind::LatexSource);
        assert_eq!(classify_submission(&mk(vec![("paper.pdf", FileClass::Pdf)])), SubmissionKind::PdfOnly);
        assert_eq!(classify_submission(&mk(vec![])), SubmissionKind::NoSource);
    }

    #[test]
    fn member_path_normalization() {
        assert_eq!(normalize_member_path("./a/./b.tex").unwrap(), "a/b.tex");
        assert!(normalize_member_path("../etc/passwd").is_err());
        assert!(normalize_member_path("a/../../x").is_err());
        assert!(normalize_member_path("/etc/passwd").is_err());
        assert!(normalize_member_path("C:\\x").is_err());
        assert!(normalize_member_path("a\\..\\..\\x").is_err());
    }

    #[test]
    fn member_ids() {
        assert_eq!(paper_id_from_member("2301/2301.00001.gz").as_deref(), Some("2301.00001"));
        assert_eq!(paper_id_from_member("x/2301.00002.pdf").as_deref(), Some("2301.00002"));
        assert_eq!(paper_id_from_member("README"), None);
    }
}
