//! Key-value persistence for datasets.
//!
//! Value layout: a JSON header line `{"pool": "...", "events": N}` followed by
//! the canonical JSONL event lines. Integers keep full width, so a round trip
//! is lossless.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::jsonl::{parse_jsonl, to_jsonl, IngestOptions};
use crate::types::{Address, EventDataset};

pub trait KvStore {
    fn put(&mut self, key: &str, value: &[u8]) -> Result<()>;
    fn get(&self, key: &str) -> Result<Option<Vec<u8>>>;
}

#[derive(Debug, Default, Clone)]
pub struct MemoryStore {
    entries: BTreeMap<String, Vec<u8>>,
}

impl KvStore for MemoryStore {
    fn put(&mut self, key: &str, value: &[u8]) -> Result<()> {
        self.entries.insert(key.to_string(), value.to_vec());
        Ok(())
    }

    fn get(&self, key: &str) -> Result<Option<Vec<u8>>> {
        Ok(self.entries.get(key).cloned())
    }
}

/// One file per key under a root directory.
#[derive(Debug, Clone)]
pub struct DirStore {
    root: PathBuf,
}

impl DirStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(root.display().to_string(), e))?;
        Ok(DirStore { root })
    }

    fn path_for(&self, key: &str) -> Result<PathBuf> {
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            || key.starts_with('.')
        {
            return Err(Error::Storage(format!("invalid key {key:?}")));
        }
        Ok(self.root.join(key))
    }
}

impl KvStore for DirStore {
    fn put(&mut self, key: &str, value: &[u8]) -> Result<()> {
        let path = self.path_for(key)?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, value).map_err(|e| Error::Storage(format!("{}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::Storage(format!("{}: {e}", path.display())))
    }

    fn get(&self, key: &str) -> Result<Option<Vec<u8>>> {
        let path = self.path_for(key)?;
        match std::fs::read(&path) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::Storage(format!("{}: {e}", path.display()))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    pool: Address,
    events: usize,
}

pub fn persist(dataset: &EventDataset, store: &mut dyn KvStore, key: &str) -> Result<()> {
    let header = serde_json::to_string(&Header {
        pool: dataset.pool_address(),
        events: dataset.len(),
    })?;
    let mut value = header.into_bytes();
    value.push(b'\n');
    value.extend_from_slice(to_jsonl(dataset).as_bytes());
    store.put(key, &value)
}

pub fn load(store: &dyn KvStore, key: &str) -> Result<EventDataset> {
    let bytes = store.get(key)?.ok_or_else(|| Error::NotFound(key.to_string()))?;
    let mut reader = std::io::BufReader::new(bytes.as_slice());
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::Storage(format!("{key}: {e}")))?;
    let header: Header =
        serde_json::from_str(&first).map_err(|e| Error::Storage(format!("{key}: bad header: {e}")))?;
    let report = parse_jsonl(reader, header.pool, IngestOptions { strict: true })?;
    if report.dataset.len() != header.events || report.zero_liquidity > 0 {
        return Err(Error::Storage(format!(
            "{key}: header declares {} events, found {}",
            header.events,
            report.dataset.len()
        )));
    }
    Ok(report.dataset)
}
