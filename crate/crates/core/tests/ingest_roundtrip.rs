use std::collections::HashMap;
use std::io::Cursor;
use std::sync::atomic::{AtomicU32, Ordering};

use proptest::prelude::*;

use lsis_core::fixtures::{random_dataset, RandomSpec};
use lsis_core::ingest::remote::{encode_log, BURN_TOPIC, MINT_TOPIC};
use lsis_core::ingest::{
    fetch_and_preprocess, load, parse_jsonl, persist, DirStore, EventSource, FetchOptions, IngestOptions, LogFilter,
    MemoryStore, RpcLog, RpcTransaction, SourceError,
};
use lsis_core::ingest::jsonl::to_jsonl;
use lsis_core::{Address, EventDataset, EventKind, TxHash};

/// In-memory node that serves a dataset's logs, optionally failing the
/// first few log queries with a transport error.
struct MockNode {
    pool: Address,
    logs: Vec<(EventKind, u64, RpcLog)>,
    senders: HashMap<TxHash, Address>,
    transient_failures: AtomicU32,
}

impl MockNode {
    fn new(d: &EventDataset, transient_failures: u32) -> Self {
        // Shuffled-ish order: the pipeline must sort.
        let mut logs: Vec<_> = d
            .events()
            .iter()
            .map(|e| (e.kind, e.block_number, encode_log(e, d.pool_address())))
            .collect();
        logs.reverse();
        let mut removed = logs[0].2.clone();
        removed.removed = true;
        removed.log_index = "0xffff".into();
        logs.push((logs[0].0, logs[0].1, removed));
        MockNode {
            pool: d.pool_address(),
            logs,
            senders: d.events().iter().map(|e| (e.tx_hash, e.owner)).collect(),
            transient_failures: AtomicU32::new(transient_failures),
        }
    }
}

impl EventSource for MockNode {
    fn get_logs(&self, f: &LogFilter) -> Result<Vec<RpcLog>, SourceError> {
        if self
            .transient_failures
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
            .is_ok()
        {
            return Err(SourceError::Transport("timeout".into()));
        }
        assert_eq!(f.address, self.pool);
        let kind = match f.topic0 {
            t if t == MINT_TOPIC => EventKind::Mint,
            t if t == BURN_TOPIC => EventKind::Burn,
            _ => return Err(SourceError::Invalid("topic".into())),
        };
        Ok(self
            .logs
            .iter()
            .filter(|(k, b, _)| *k == kind && (f.from_block..=f.to_block).contains(b))
            .map(|(_, _, l)| l.clone())
            .collect())
    }

    fn get_transaction(&self, hash: &TxHash) -> Result<RpcTransaction, SourceError> {
        let from = self.senders.get(hash).ok_or_else(|| SourceError::Invalid("unknown tx".into()))?;
        Ok(RpcTransaction {
            hash: hash.to_string(),
            from: from.to_string(),
        })
    }
}

fn dataset(seed: u64, events: usize) -> EventDataset {
    random_dataset(RandomSpec {
        events,
        owners: 12,
        seed,
        ..Default::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn node_fetch_reproduces_dataset(seed in any::<u64>(), events in 5usize..300, chunk in 1u64..500, flaky in 0u32..2) {
        let d = dataset(seed, events);
        let node = MockNode::new(&d, flaky);
        let opts = FetchOptions { max_attempts: 3, chunk_size: chunk };
        let got = fetch_and_preprocess(&node, d.pool_address(), d.min_block(), d.max_block(), opts).unwrap();
        prop_assert_eq!(got.events(), d.events());
        prop_assert_eq!(got.content_hash(), d.content_hash());
    }

    #[test]
    fn jsonl_and_store_round_trip(seed in any::<u64>(), events in 1usize..300) {
        let d = dataset(seed, events);
        let text = to_jsonl(&d);
        let back = parse_jsonl(Cursor::new(text.as_bytes()), d.pool_address(), IngestOptions { strict: true }).unwrap();
        prop_assert_eq!(back.dataset.events(), d.events());
        prop_assert_eq!(to_jsonl(&back.dataset), text);

        let mut mem = MemoryStore::default();
        persist(&d, &mut mem, "pool").unwrap();
        let stored = load(&mem, "pool").unwrap();
        prop_assert_eq!(stored.events(), d.events());
    }
}

#[test]
fn dir_store_survives_reopen() {
    let d = dataset(99, 500);
    let dir = tempfile::tempdir().unwrap();
    {
        let mut s = DirStore::open(dir.path()).unwrap();
        persist(&d, &mut s, "snapshot").unwrap();
    }
    let s = DirStore::open(dir.path()).unwrap();
    let back = load(&s, "snapshot").unwrap();
    assert_eq!(back.content_hash(), d.content_hash());
}

#[test]
fn persistent_transport_failure_is_reported() {
    let d = dataset(1, 20);
    let node = MockNode::new(&d, 100);
    assert!(fetch_and_preprocess(&node, d.pool_address(), d.min_block(), d.max_block(), FetchOptions::default()).is_err());
}
