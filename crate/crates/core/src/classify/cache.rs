//! Response cache keyed by model and prompt hash, persisted as JSONL.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::jsonl::{read_jsonl, JsonlError, JsonlWriter};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    key: String,
    model: String,
    response: String,
}

pub fn cache_key(model: &str, system: &str, prompt: &str) -> String {
    let mut h = Sha256::new();
    for part in [model, system, prompt] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Only model responses are stored; prompts appear as hashes.
pub struct TranscriptCache {
    path: PathBuf,
    inner: Mutex<(HashMap<String, String>, Option<JsonlWriter>)>,
}

impl TranscriptCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, JsonlError> {
        let path = path.as_ref().to_path_buf();
        let map = if path.exists() {
            read_jsonl::<Entry>(&path)?.into_iter().map(|e| (e.key, e.response)).collect()
        } else {
            HashMap::new()
        };
        Ok(TranscriptCache { path, inner: Mutex::new((map, None)) })
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.inner.lock().expect("cache lock").0.get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, key: &str, model: &str, response: &str) -> Result<(), JsonlError> {
        let mut guard = self.inner.lock().expect("cache lock");
        let (map, writer) = &mut *guard;
        if map.contains_key(key) {
            return Ok(());
        }
        if writer.is_none() {
            if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| JsonlError::Io { path: dir.to_path_buf(), source })?;
            }
            *writer = Some(JsonlWriter::append(&self.path)?);
        }
        let entry = Entry { key: key.to_string(), model: model.to_string(), response: response.to_string() };
        writer.as_mut().expect("writer opened").write(&entry)?;
        map.insert(entry.key, entry.response);
        Ok(())
    }
}
