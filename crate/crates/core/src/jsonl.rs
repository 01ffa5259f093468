//! Line-atomic JSONL persistence.
//!
//! Every record is serialized to a complete line in memory and handed to the
//! file in a single `write_all`, so a reader never observes half a record
//! unless the process dies inside that call. Readers drop an unterminated
//! trailing line.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("serialize: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub struct JsonlWriter {
    file: File,
    path: PathBuf,
    written: usize,
}

impl JsonlWriter {
    /// Truncating create.
    pub fn create(path: impl AsRef<Path>) -> Result<Self, JsonlError> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|source| JsonlError::Io { path: path.clone(), source })?;
        Ok(JsonlWriter { file, path, written: 0 })
    }

    pub fn append(path: impl AsRef<Path>) -> Result<Self, JsonlError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|source| JsonlError::Io { path: path.clone(), source })?;
        Ok(JsonlWriter { file, path, written: 0 })
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<(), JsonlError> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        self.file.write_all(&line).map_err(|source| JsonlError::Io { path: self.path.clone(), source })?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }
}

/// Serialize records into a JSONL string (used for stdout output).
pub fn to_jsonl_string<T: Serialize>(records: &[T]) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, JsonlError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| JsonlError::Io { path: path.to_path_buf(), source })?;
    read_jsonl_from(file, path)
}

pub fn read_jsonl_from<T: DeserializeOwned, R: Read>(reader: R, path: &Path) -> Result<Vec<T>, JsonlError> {
    let mut reader = BufReader::new(reader);
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(|source| JsonlError::Io { path: path.to_path_buf(), source })?;
        if n == 0 {
            break;
        }
        line_no += 1;
        if !buf.ends_with('\n') {
            log::warn!("{}:{}: dropping unterminated trailing line", path.display(), line_no);
            break;
        }
        let trimmed = buf.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value = serde_json::from_str(trimmed).map_err(|source| JsonlError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            source,
        })?;
        out.push(value);
    }
    Ok(out)
}
