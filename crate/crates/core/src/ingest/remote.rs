//! Remote log source abstraction and the fetch → enrich → merge → sort pipeline.
//!
//! The source answers two request shapes that mirror standard node RPC:
//! filtered logs (`eth_getLogs`) and transaction lookup by hash
//! (`eth_getTransactionByHash`). Transport is left to implementors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{check_tick, Address, EventDataset, EventKind, PoolEvent, TxHash, U256};

/// keccak256("Mint(address,address,int24,int24,uint128,uint256,uint256)")
pub const MINT_TOPIC: [u8; 32] = hex_literal("7a53080ba414158be7ec69b987b5fb7d07dee101fe85488f0853ae16239d0bde");
/// keccak256("Burn(address,int24,int24,uint128,uint256,uint256)")
pub const BURN_TOPIC: [u8; 32] = hex_literal("0c396cd989a39f4459b5fa1aed6a9a8dcdbc45908acfd67e028cd568da98982c");

const fn hex_literal(s: &str) -> [u8; 32] {
    const fn nibble(c: u8) -> u8 {
        match c {
            b'0'..=b'9' => c - b'0',
            b'a'..=b'f' => c - b'a' + 10,
            _ => panic!("bad hex"),
        }
    }
    let b = s.as_bytes();
    let mut out = [0u8; 32];
    let mut i = 0;
    while i < 32 {
        out[i] = nibble(b[2 * i]) << 4 | nibble(b[2 * i + 1]);
        i += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogFilter {
    pub address: Address,
    pub topic0: [u8; 32],
    pub from_block: u64,
    pub to_block: u64,
}

/// A log entry as returned by `eth_getLogs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RpcLog {
    pub address: String,
    pub topics: Vec<String>,
    pub data: String,
    pub block_number: String,
    pub transaction_hash: String,
    pub log_index: String,
    #[serde(default)]
    pub removed: bool,
}

/// The subset of `eth_getTransactionByHash` the pipeline reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpcTransaction {
    pub hash: String,
    pub from: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SourceError {
    /// Network or node failure; the call may succeed if repeated.
    #[error("transport: {0}")]
    Transport(String),
    #[error("invalid response: {0}")]
    Invalid(String),
}

pub trait EventSource: Sync {
    fn get_logs(&self, filter: &LogFilter) -> std::result::Result<Vec<RpcLog>, SourceError>;
    fn get_transaction(&self, hash: &TxHash) -> std::result::Result<RpcTransaction, SourceError>;
}

#[derive(Debug, Clone, Copy)]
pub struct FetchOptions {
    /// Attempts per request, including the first.
    pub max_attempts: u32,
    /// Block span per log query; ranges are split and may be fetched in parallel.
    pub chunk_size: u64,
}

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions {
            max_attempts: 3,
            chunk_size: 10_000,
        }
    }
}

fn with_retries<T>(attempts: u32, mut call: impl FnMut() -> std::result::Result<T, SourceError>) -> Result<T> {
    let attempts = attempts.max(1);
    let mut last = String::new();
    for attempt in 1..=attempts {
        match call() {
            Ok(v) => return Ok(v),
            Err(SourceError::Transport(msg)) => {
                log::warn!("transport error (attempt {attempt}/{attempts}): {msg}");
                last = msg;
            }
            Err(SourceError::Invalid(msg)) => {
                return Err(Error::Source {
                    attempts: attempt,
                    message: msg,
                })
            }
        }
    }
    Err(Error::Source {
        attempts,
        message: last,
    })
}

fn parse_quantity(s: &str, what: &str) -> Result<u64> {
    let body = s
        .strip_prefix("0x")
        .ok_or_else(|| Error::InvalidEvent(format!("{what} is not a hex quantity: {s:?}")))?;
    u64::from_str_radix(body, 16).map_err(|e| Error::InvalidEvent(format!("{what} {s:?}: {e}")))
}

fn parse_word(s: &str) -> Result<[u8; 32]> {
    let body = s.strip_prefix("0x").unwrap_or(s);
    let mut out = [0u8; 32];
    hex::decode_to_slice(body, &mut out).map_err(|e| Error::InvalidEvent(format!("topic {s:?}: {e}")))?;
    Ok(out)
}

/// int24 from a sign-extended 32-byte word.
fn word_to_tick(word: &[u8; 32]) -> Result<i32> {
    let raw = i32::from_be_bytes([word[28], word[29], word[30], word[31]]);
    check_tick(raw as i64)
}

fn word_to_u128(word: &[u8]) -> Result<u128> {
    if word[..16].iter().any(|b| *b != 0) {
        return Err(Error::InvalidEvent("uint128 field overflows".into()));
    }
    Ok(u128::from_be_bytes(word[16..32].try_into().expect("16 bytes")))
}

fn data_words(data: &str, expected: usize) -> Result<Vec<[u8; 32]>> {
    let bytes = hex::decode(data.strip_prefix("0x").unwrap_or(data))
        .map_err(|e| Error::InvalidEvent(format!("log data: {e}")))?;
    if bytes.len() != expected * 32 {
        return Err(Error::InvalidEvent(format!(
            "log data has {} bytes, expected {}",
            bytes.len(),
            expected * 32
        )));
    }
    Ok(bytes
        .chunks_exact(32)
        .map(|c| c.try_into().expect("32-byte chunk"))
        .collect())
}

/// Decodes a pool Mint or Burn log. `tx_sender` becomes the owner of Burn
/// events; Mint keeps the owner carried by the event.
pub fn decode_log(log: &RpcLog, kind: EventKind, tx_sender: Address) -> Result<PoolEvent> {
    if log.topics.len() != 4 {
        return Err(Error::InvalidEvent(format!("expected 4 topics, got {}", log.topics.len())));
    }
    let topics: Vec<[u8; 32]> = log.topics.iter().map(|t| parse_word(t)).collect::<Result<_>>()?;
    let expected_sig = match kind {
        EventKind::Mint => MINT_TOPIC,
        EventKind::Burn => BURN_TOPIC,
    };
    if topics[0] != expected_sig {
        return Err(Error::InvalidEvent(format!("unexpected event signature {}", log.topics[0])));
    }
    let indexed_owner = Address::from_word(&topics[1]);
    let tick_lower = word_to_tick(&topics[2])?;
    let tick_upper = word_to_tick(&topics[3])?;
    let (owner, sender, words) = match kind {
        EventKind::Mint => {
            let words = data_words(&log.data, 4)?;
            let sender = Address::from_word(&words[0]);
            (indexed_owner, sender, words[1..].to_vec())
        }
        // The Burn event's only address is the position owner as seen by the
        // pool (often a position manager contract); it is kept as `sender`.
        EventKind::Burn => (tx_sender, indexed_owner, data_words(&log.data, 3)?),
    };
    let event = PoolEvent {
        kind,
        owner,
        sender,
        tick_lower,
        tick_upper,
        liquidity: word_to_u128(&words[0])?,
        amount0: U256::from_be_bytes(&words[1]),
        amount1: U256::from_be_bytes(&words[2]),
        block_number: parse_quantity(&log.block_number, "blockNumber")?,
        log_index: u32::try_from(parse_quantity(&log.log_index, "logIndex")?)
            .map_err(|_| Error::InvalidEvent("logIndex exceeds u32".into()))?,
        tx_hash: log.transaction_hash.parse()?,
    };
    Ok(event)
}

fn block_chunks(start: u64, end: u64, size: u64) -> Vec<(u64, u64)> {
    let size = size.max(1);
    let mut out = Vec::new();
    let mut from = start;
    loop {
        let to = from.saturating_add(size - 1).min(end);
        out.push((from, to));
        if to == end {
            break;
        }
        from = to + 1;
    }
    out
}

fn fetch_kind<S: EventSource + ?Sized>(
    source: &S,
    pool: Address,
    topic0: [u8; 32],
    chunks: &[(u64, u64)],
    options: FetchOptions,
) -> Result<Vec<RpcLog>> {
    let fetch = |&(from_block, to_block): &(u64, u64)| {
        let filter = LogFilter {
            address: pool,
            topic0,
            from_block,
            to_block,
        };
        with_retries(options.max_attempts, || source.get_logs(&filter))
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<RpcLog>> = {
        use rayon::prelude::*;
        chunks.par_iter().map(fetch).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<RpcLog>> = chunks.iter().map(fetch).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().filter(|l| !l.removed).collect())
}

fn fetch_tx_senders<S: EventSource + ?Sized>(
    source: &S,
    logs: &[RpcLog],
    options: FetchOptions,
) -> Result<BTreeMap<TxHash, Address>> {
    let hashes: BTreeSet<TxHash> = logs
        .iter()
        .map(|l| l.transaction_hash.parse())
        .collect::<Result<_>>()?;
    let mut senders = BTreeMap::new();
    for hash in hashes {
        let tx = with_retries(options.max_attempts, || source.get_transaction(&hash))?;
        senders.insert(hash, tx.from.parse()?);
    }
    Ok(senders)
}

/// Fetches Mint and Burn logs for `[start_block, end_block]`, attaches each
/// log's transaction sender, merges both kinds and sorts by
/// `(blockNumber, logIndex)`.
pub fn fetch_and_preprocess<S: EventSource + ?Sized>(
    source: &S,
    pool_address: Address,
    start_block: u64,
    end_block: u64,
    options: FetchOptions,
) -> Result<EventDataset> {
    if start_block > end_block {
        return Err(Error::InvertedRange {
            start: start_block,
            end: end_block,
        });
    }
    let chunks = block_chunks(start_block, end_block, options.chunk_size);
    let mint_logs = fetch_kind(source, pool_address, MINT_TOPIC, &chunks, options)?;
    let burn_logs = fetch_kind(source, pool_address, BURN_TOPIC, &chunks, options)?;
    let mint_senders = fetch_tx_senders(source, &mint_logs, options)?;
    let burn_senders = fetch_tx_senders(source, &burn_logs, options)?;

    let mut events = Vec::with_capacity(mint_logs.len() + burn_logs.len());
    for (logs, senders, kind) in [
        (&mint_logs, &mint_senders, EventKind::Mint),
        (&burn_logs, &burn_senders, EventKind::Burn),
    ] {
        for log in logs {
            let hash: TxHash = log.transaction_hash.parse()?;
            let sender = senders[&hash];
            let event = decode_log(log, kind, sender)?;
            if event.liquidity == 0 {
                continue;
            }
            events.push(event);
        }
    }
    EventDataset::new(pool_address, events)
}

/// Encodes an event back into the log shape a node would return. Used by
/// mock sources and tests.
pub fn encode_log(event: &PoolEvent, pool: Address) -> RpcLog {
    fn addr_word(a: &Address) -> String {
        format!("0x{}{}", "00".repeat(12), hex::encode(a.0))
    }
    fn tick_word(t: i32) -> String {
        let fill = if t < 0 { "ff" } else { "00" };
        format!("0x{}{}", fill.repeat(28), hex::encode(t.to_be_bytes()))
    }
    fn uint_word(v: &num_bigint::BigUint) -> String {
        let bytes = v.to_bytes_be();
        format!("{}{}", "00".repeat(32 - bytes.len()), hex::encode(bytes))
    }
    let liq = uint_word(&num_bigint::BigUint::from(event.liquidity));
    let (topic0, indexed, data) = match event.kind {
        EventKind::Mint => (
            MINT_TOPIC,
            event.owner,
            format!(
                "0x{}{}{}{}",
                &addr_word(&event.sender)[2..],
                liq,
                uint_word(event.amount0.get()),
                uint_word(event.amount1.get())
            ),
        ),
        EventKind::Burn => (
            BURN_TOPIC,
            event.sender,
            format!("0x{}{}{}", liq, uint_word(event.amount0.get()), uint_word(event.amount1.get())),
        ),
    };
    RpcLog {
        address: pool.to_string(),
        topics: vec![
            format!("0x{}", hex::encode(topic0)),
            addr_word(&indexed),
            tick_word(event.tick_lower),
            tick_word(event.tick_upper),
        ],
        data,
        block_number: format!("0x{:x}", event.block_number),
        transaction_hash: event.tx_hash.to_string(),
        log_index: format!("0x{:x}", event.log_index),
        removed: false,
    }
}
