//! One JSON object per line, keys
//! `type, owner, sender, tickLower, tickUpper, liquidity, amount0, amount1, blockNumber, logIndex, txHash`.
//! Integers may be JSON numbers or decimal strings; on output anything above
//! 2^53 - 1 is written as a string.

use std::fmt::Display;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::types::{Address, EventDataset, EventKind, PoolEvent, TxHash, U256};

const MAX_SAFE_JSON_INT: u128 = (1u128 << 53) - 1;

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Fail on the first schema violation instead of skipping the line.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub dataset: EventDataset,
    /// Lines that failed validation (lenient mode only).
    pub skipped: Vec<SkippedLine>,
    /// Valid lines dropped because their liquidity was zero.
    pub zero_liquidity: usize,
}

impl IngestReport {
    pub fn skipped_count(&self) -> usize {
        self.skipped.len() + self.zero_liquidity
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FlexInt {
    Str(String),
    Num(serde_json::Number),
}

fn flex<'de, D, T>(d: D) -> std::result::Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: Display,
{
    let text = match FlexInt::deserialize(d)? {
        FlexInt::Str(s) => s,
        FlexInt::Num(n) => n.to_string(),
    };
    text.trim().parse::<T>().map_err(serde::de::Error::custom)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EventRecord {
    #[serde(rename = "type")]
    kind: String,
    owner: Address,
    sender: Address,
    #[serde(rename = "tickLower", deserialize_with = "flex")]
    tick_lower: i64,
    #[serde(rename = "tickUpper", deserialize_with = "flex")]
    tick_upper: i64,
    #[serde(deserialize_with = "flex")]
    liquidity: u128,
    #[serde(deserialize_with = "flex")]
    amount0: U256,
    #[serde(deserialize_with = "flex")]
    amount1: U256,
    #[serde(rename = "blockNumber", deserialize_with = "flex")]
    block_number: u64,
    #[serde(rename = "logIndex", deserialize_with = "flex")]
    log_index: u32,
    #[serde(rename = "txHash")]
    tx_hash: TxHash,
}

enum LineOutcome {
    Event(PoolEvent),
    ZeroLiquidity,
}

fn parse_line(text: &str) -> std::result::Result<LineOutcome, String> {
    let rec: EventRecord = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let kind: EventKind = rec.kind.parse().map_err(|e: Error| e.to_string())?;
    if rec.liquidity == 0 {
        return Ok(LineOutcome::ZeroLiquidity);
    }
    let tick_lower = i32::try_from(rec.tick_lower).map_err(|_| format!("tickLower {} out of range", rec.tick_lower))?;
    let tick_upper = i32::try_from(rec.tick_upper).map_err(|_| format!("tickUpper {} out of range", rec.tick_upper))?;
    let event = PoolEvent {
        kind,
        owner: rec.owner,
        sender: rec.sender,
        tick_lower,
        tick_upper,
        liquidity: rec.liquidity,
        amount0: rec.amount0,
        amount1: rec.amount1,
        block_number: rec.block_number,
        log_index: rec.log_index,
        tx_hash: rec.tx_hash,
    };
    event.validate().map_err(|e| e.to_string())?;
    Ok(LineOutcome::Event(event))
}

/// Parses JSONL from any reader. Blank lines are ignored.
pub fn parse_jsonl<R: BufRead>(reader: R, pool_address: Address, options: IngestOptions) -> Result<IngestReport> {
    let mut events = Vec::new();
    let mut skipped = Vec::new();
    let mut zero_liquidity = 0;
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|e| Error::io(format!("line {line_no}"), e))?;
        if text.trim().is_empty() {
            continue;
        }
        match parse_line(&text) {
            Ok(LineOutcome::Event(e)) => {
                if seen.insert(e.position_key()) {
                    events.push(e);
                } else {
                    skipped.push(SkippedLine {
                        line: line_no,
                        reason: format!("duplicate (blockNumber, logIndex) = {:?}", e.position_key()),
                    });
                }
            }
            Ok(LineOutcome::ZeroLiquidity) => zero_liquidity += 1,
            Err(reason) => skipped.push(SkippedLine { line: line_no, reason }),
        }
    }
    if options.strict {
        if let Some(first) = skipped.first() {
            return Err(Error::StrictValidation {
                skipped: skipped.len(),
                first_line: first.line,
                first_message: first.reason.clone(),
            });
        }
    }
    for s in &skipped {
        log::warn!("skipped line {}: {}", s.line, s.reason);
    }
    let dataset = EventDataset::new(pool_address, events)?;
    Ok(IngestReport {
        dataset,
        skipped,
        zero_liquidity,
    })
}

pub fn ingest_jsonl(path: impl AsRef<Path>, pool_address: Address, options: IngestOptions) -> Result<IngestReport> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_jsonl(BufReader::new(file), pool_address, options)
}

fn int_value(v: u128) -> Value {
    if v <= MAX_SAFE_JSON_INT {
        Value::from(v as u64)
    } else {
        Value::String(v.to_string())
    }
}

fn big_value(v: &U256) -> Value {
    match u128::try_from(v.get()) {
        Ok(small) => int_value(small),
        Err(_) => Value::String(v.to_string()),
    }
}

/// Canonical single-line encoding with keys in schema order.
pub fn to_json_line(e: &PoolEvent) -> String {
    let mut m = Map::new();
    m.insert("type".into(), Value::from(e.kind.as_str()));
    m.insert("owner".into(), Value::from(e.owner.to_string()));
    m.insert("sender".into(), Value::from(e.sender.to_string()));
    m.insert("tickLower".into(), Value::from(e.tick_lower));
    m.insert("tickUpper".into(), Value::from(e.tick_upper));
    m.insert("liquidity".into(), int_value(e.liquidity));
    m.insert("amount0".into(), big_value(&e.amount0));
    m.insert("amount1".into(), big_value(&e.amount1));
    m.insert("blockNumber".into(), int_value(e.block_number as u128));
    m.insert("logIndex".into(), Value::from(e.log_index));
    m.insert("txHash".into(), Value::from(e.tx_hash.to_string()));
    Value::Object(m).to_string()
}

pub fn to_jsonl(dataset: &EventDataset) -> String {
    let mut out = String::new();
    for e in dataset.events() {
        out.push_str(&to_json_line(e));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const POOL: &str = "0x88e6a0c2ddd26feeb64f039a2c41296fcb3f5640";

    fn line(kind: &str, block: u64, log: u32, liq: &str) -> String {
        format!(
            r#"{{"type":"{kind}","owner":"0x{o}","sender":"0x{o}","tickLower":-10,"tickUpper":10,"liquidity":"{liq}","amount0":"1","amount1":2,"blockNumber":{block},"logIndex":{log},"txHash":"0x{h}"}}"#,
            o = "ab".repeat(20),
            h = "cd".repeat(32),
        )
    }

    fn parse(text: &str, strict: bool) -> Result<IngestReport> {
        parse_jsonl(text.as_bytes(), POOL.parse().unwrap(), IngestOptions { strict })
    }

    #[test]
    fn sorts_by_block() {
        let text = format!("{}\n{}\n", line("Mint", 5, 0, "10"), line("Mint", 3, 0, "10"));
        let r = parse(&text, false).unwrap();
        let blocks: Vec<u64> = r.dataset.events().iter().map(|e| e.block_number).collect();
        assert_eq!(blocks, vec![3, 5]);
        assert_eq!(r.skipped_count(), 0);
    }

    #[test]
    fn lenient_skips_missing_field() {
        let bad = line("Mint", 4, 0, "10").replace(r#""tickUpper":10,"#, "");
        let text = format!("{}\n{}\n", line("Mint", 5, 0, "10"), bad);
        let r = parse(&text, false).unwrap();
        assert_eq!(r.dataset.len(), 1);
        assert_eq!(r.skipped_count(), 1);
        assert_eq!(r.skipped[0].line, 2);
        assert!(r.skipped[0].reason.contains("tickUpper"));
    }

    #[test]
    fn strict_rejects_missing_field() {
        let bad = line("Mint", 4, 0, "10").replace(r#""tickUpper":10,"#, "");
        let text = format!("{}\n{}\n", line("Mint", 5, 0, "10"), bad);
        assert!(matches!(parse(&text, true), Err(Error::StrictValidation { skipped: 1, first_line: 2, .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse("", false), Err(Error::EmptyDataset)));
        assert!(matches!(parse("\n\n", false), Err(Error::EmptyDataset)));
    }

    #[test]
    fn zero_liquidity_is_dropped_and_counted() {
        let text = format!("{}\n{}\n", line("Burn", 5, 0, "0"), line("Mint", 3, 0, "7"));
        let r = parse(&text, true).unwrap();
        assert_eq!(r.dataset.len(), 1);
        assert_eq!(r.zero_liquidity, 1);
    }

    #[test]
    fn large_values_round_trip_as_strings() {
        let big = (1u128 << 100).to_string();
        let text = line("Mint", 1, 0, &big);
        let r = parse(&text, true).unwrap();
        let out = to_json_line(&r.dataset.events()[0]);
        assert!(out.contains(&format!("\"liquidity\":\"{big}\"")));
        assert!(out.contains("\"amount0\":1"));
        let again = parse(&out, true).unwrap();
        assert_eq!(again.dataset, r.dataset);
    }

    #[test]
    fn unknown_key_is_a_schema_error() {
        let text = line("Mint", 1, 0, "5").replace("\"type\"", "\"extra\":1,\"type\"");
        let r = parse(&format!("{text}\n{}", line("Mint", 2, 0, "5")), false).unwrap();
        assert_eq!(r.skipped.len(), 1);
    }

    #[test]
    fn ingest_is_idempotent_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        std::fs::write(&path, format!("{}\n{}\n", line("Mint", 5, 1, "10"), line("Burn", 5, 0, "3"))).unwrap();
        let a = ingest_jsonl(&path, POOL.parse().unwrap(), IngestOptions::default()).unwrap();
        let b = ingest_jsonl(&path, POOL.parse().unwrap(), IngestOptions::default()).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert!(matches!(
            ingest_jsonl(dir.path().join("missing.jsonl"), POOL.parse().unwrap(), IngestOptions::default()),
            Err(Error::Io { .. })
        ));
    }
}
