//! Event acquisition: JSONL fixtures, a pluggable remote log source, and a
//! key-value persistence layer.

pub mod jsonl;
pub mod remote;
pub mod store;

pub use jsonl::{ingest_jsonl, parse_jsonl, IngestOptions, IngestReport, SkippedLine};
pub use remote::{fetch_and_preprocess, EventSource, FetchOptions, LogFilter, RpcLog, RpcTransaction, SourceError};
pub use store::{load, persist, DirStore, KvStore, MemoryStore};
