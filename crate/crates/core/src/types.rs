use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MIN_TICK: i32 = -887_272;
pub const MAX_TICK: i32 = 887_272;

pub fn check_tick(tick: i64) -> Result<i32> {
    if tick < MIN_TICK as i64 || tick > MAX_TICK as i64 {
        return Err(Error::TickOutOfRange(tick));
    }
    Ok(tick as i32)
}

fn parse_hex_fixed<const N: usize>(s: &str, what: &str) -> Result<[u8; N]> {
    let body = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(|| Error::InvalidArgument(format!("{what} must start with 0x: {s:?}")))?;
    if body.len() != N * 2 {
        return Err(Error::InvalidArgument(format!(
            "{what} must have {} hex digits, got {}",
            N * 2,
            body.len()
        )));
    }
    let mut out = [0u8; N];
    hex::decode_to_slice(body, &mut out)
        .map_err(|e| Error::InvalidArgument(format!("{what} {s:?}: {e}")))?;
    Ok(out)
}

macro_rules! hex_newtype {
    ($name:ident, $len:expr, $what:expr) => {
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub [u8; $len]);

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                parse_hex_fixed::<$len>(s.trim(), $what).map($name)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "0x{}", hex::encode(self.0))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(self, f)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

hex_newtype!(Address, 20, "address");
hex_newtype!(TxHash, 32, "tx hash");

impl Address {
    /// Last 20 bytes of a 32-byte ABI word.
    pub fn from_word(word: &[u8; 32]) -> Self {
        let mut out = [0u8; 20];
        out.copy_from_slice(&word[12..]);
        Address(out)
    }

    /// Deterministic test/fixture address derived from an index.
    pub fn from_index(i: u64) -> Self {
        let mut out = [0u8; 20];
        out[12..].copy_from_slice(&i.to_be_bytes());
        out[0] = 0x11;
        Address(out)
    }
}

/// Unsigned integer below 2^256 (token amounts).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct U256(BigUint);

impl U256 {
    pub fn new(value: BigUint) -> Result<Self> {
        if value.bits() > 256 {
            return Err(Error::InvalidArgument(format!("{value} exceeds 256 bits")));
        }
        Ok(U256(value))
    }

    pub fn from_be_bytes(word: &[u8; 32]) -> Self {
        U256(BigUint::from_bytes_be(word))
    }

    pub fn get(&self) -> &BigUint {
        &self.0
    }
}

impl From<u128> for U256 {
    fn from(v: u128) -> Self {
        U256(BigUint::from(v))
    }
}

impl FromStr for U256 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v = BigUint::from_str(s.trim())
            .map_err(|e| Error::InvalidArgument(format!("not an unsigned integer {s:?}: {e}")))?;
        U256::new(v)
    }
}

impl fmt::Display for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    Mint,
    Burn,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Mint => "Mint",
            EventKind::Burn => "Burn",
        }
    }
}

impl FromStr for EventKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Mint" | "mint" => Ok(EventKind::Mint),
            "Burn" | "burn" => Ok(EventKind::Burn),
            other => Err(Error::InvalidArgument(format!("unknown event type {other:?}"))),
        }
    }
}

/// One decoded Mint or Burn log.
///
/// `owner` is the attributed liquidity provider: the event's owner field for
/// Mint, the transaction sender for Burn.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PoolEvent {
    pub kind: EventKind,
    pub owner: Address,
    pub sender: Address,
    pub tick_lower: i32,
    pub tick_upper: i32,
    pub liquidity: u128,
    pub amount0: U256,
    pub amount1: U256,
    pub block_number: u64,
    pub log_index: u32,
    pub tx_hash: TxHash,
}

impl PoolEvent {
    pub fn validate(&self) -> Result<()> {
        if self.tick_lower >= self.tick_upper {
            return Err(Error::InvalidEvent(format!(
                "tickLower {} must be below tickUpper {}",
                self.tick_lower, self.tick_upper
            )));
        }
        check_tick(self.tick_lower as i64)?;
        check_tick(self.tick_upper as i64)?;
        if self.liquidity == 0 {
            return Err(Error::InvalidEvent("zero liquidity".into()));
        }
        Ok(())
    }

    /// Signed liquidity change for the owner: +L for Mint, -L for Burn.
    pub fn signed_liquidity(&self) -> BigInt {
        let l = BigInt::from(self.liquidity);
        match self.kind {
            EventKind::Mint => l,
            EventKind::Burn => -l,
        }
    }

    pub fn position_key(&self) -> (u64, u32) {
        (self.block_number, self.log_index)
    }
}

/// A validated, time-ordered set of events for one pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDataset {
    pool_address: Address,
    events: Vec<PoolEvent>,
    min_block: u64,
    max_block: u64,
}

impl EventDataset {
    /// Sorts by `(block_number, log_index)`, validates every event and rejects
    /// duplicate ordering keys.
    pub fn new(pool_address: Address, mut events: Vec<PoolEvent>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for e in &events {
            e.validate()?;
        }
        events.sort_by(cmp_events);
        let mut seen = HashSet::with_capacity(events.len());
        for e in &events {
            if !seen.insert(e.position_key()) {
                return Err(Error::InvalidEvent(format!(
                    "duplicate (blockNumber, logIndex) = ({}, {})",
                    e.block_number, e.log_index
                )));
            }
        }
        let min_block = events.first().map(|e| e.block_number).unwrap_or(0);
        let max_block = events.last().map(|e| e.block_number).unwrap_or(0);
        Ok(EventDataset {
            pool_address,
            events,
            min_block,
            max_block,
        })
    }

    pub fn pool_address(&self) -> Address {
        self.pool_address
    }

    pub fn events(&self) -> &[PoolEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn min_block(&self) -> u64 {
        self.min_block
    }

    pub fn max_block(&self) -> u64 {
        self.max_block
    }

    /// Distinct owners in ascending address order.
    pub fn owners(&self) -> Vec<Address> {
        let mut owners: Vec<Address> = self.events.iter().map(|e| e.owner).collect();
        owners.sort();
        owners.dedup();
        owners
    }

    /// SHA-256 over the canonical JSONL form, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.pool_address.to_string().as_bytes());
        hasher.update(b"\n");
        for e in &self.events {
            hasher.update(crate::ingest::jsonl::to_json_line(e).as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

fn cmp_events(a: &PoolEvent, b: &PoolEvent) -> Ordering {
    a.position_key().cmp(&b.position_key())
}
