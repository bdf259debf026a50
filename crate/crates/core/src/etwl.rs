//! Exponentially time-weighted liquidity per owner, ranking and λ sweeps.
//!
//! Accrual follows the executable event-walk form: events are grouped by
//! owner in `(block, log_index)` order and, for every event after an owner's
//! first, the liquidity held since the previous event is credited as
//! `current · Δblocks · exp(λ · (1 − (last_block − min_block) / block_range))`.
//! Nothing accrues after an owner's final event unless
//! [`EtwlOptions::close_at_max_block`] is set.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use bigdecimal::BigDecimal;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::decimal::{self, div, is_negative, mul};
use crate::error::{Error, Result};
use crate::types::{Address, EventDataset, PoolEvent};

pub const DEFAULT_LAMBDA: &str = "-1.5";

pub fn default_lambda() -> BigDecimal {
    decimal::parse(DEFAULT_LAMBDA).expect("literal")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtwlOptions {
    /// Credit standing liquidity from each owner's last event up to the
    /// dataset's final block.
    pub close_at_max_block: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EtwlEntry {
    pub owner: Address,
    pub score: BigDecimal,
    pub rank: usize,
}

fn group_by_owner(dataset: &EventDataset) -> BTreeMap<Address, Vec<&PoolEvent>> {
    let mut groups: BTreeMap<Address, Vec<&PoolEvent>> = BTreeMap::new();
    // Dataset events are already in (block, log_index) order.
    for e in dataset.events() {
        groups.entry(e.owner).or_default().push(e);
    }
    groups
}

/// Walks one owner's events, calling `credit(current, Δblocks, last_block)`
/// for each elapsed interval.
fn walk_intervals(events: &[&PoolEvent], close_at: Option<u64>, mut credit: impl FnMut(&BigInt, u64, u64)) {
    let Some(first) = events.first() else {
        return;
    };
    let mut current = first.signed_liquidity();
    let mut last_block = first.block_number;
    for e in &events[1..] {
        let elapsed = e.block_number - last_block;
        if elapsed > 0 && !current.is_zero() {
            credit(&current, elapsed, last_block);
        }
        current += e.signed_liquidity();
        last_block = e.block_number;
    }
    if let Some(end) = close_at {
        if end > last_block && !current.is_zero() {
            credit(&current, end - last_block, last_block);
        }
    }
}

struct Decay {
    lambda: BigDecimal,
    min_block: u64,
    range: u64,
    cache: BTreeMap<u64, BigDecimal>,
}

impl Decay {
    fn new(dataset: &EventDataset, lambda: &BigDecimal) -> Self {
        Decay {
            lambda: lambda.clone(),
            min_block: dataset.min_block(),
            range: dataset.max_block() - dataset.min_block(),
            cache: BTreeMap::new(),
        }
    }

    fn weight(&mut self, last_block: u64) -> BigDecimal {
        if let Some(w) = self.cache.get(&last_block) {
            return w.clone();
        }
        let w = decay_weight(&self.lambda, last_block - self.min_block, self.range);
        self.cache.insert(last_block, w.clone());
        w
    }
}

/// `exp(λ · (1 − offset / range))`, with `range == 0` treated as offset 0.
pub fn decay_weight(lambda: &BigDecimal, offset: u64, range: u64) -> BigDecimal {
    let remaining = if range == 0 {
        BigDecimal::one()
    } else {
        div(&BigDecimal::from(range - offset), &BigDecimal::from(range))
    };
    decimal::exp(&mul(lambda, &remaining))
}

fn close_at(dataset: &EventDataset, opts: EtwlOptions) -> Option<u64> {
    opts.close_at_max_block.then_some(dataset.max_block())
}

/// Score per owner. Scores can be negative when history is truncated (a burn
/// recorded without its mint); [`rank_lps`] floors them at zero.
pub fn compute_etwl(dataset: &EventDataset, lambda: &BigDecimal) -> BTreeMap<Address, BigDecimal> {
    compute_etwl_with(dataset, lambda, EtwlOptions::default())
}

pub fn compute_etwl_with(
    dataset: &EventDataset,
    lambda: &BigDecimal,
    opts: EtwlOptions,
) -> BTreeMap<Address, BigDecimal> {
    if !is_negative(lambda) {
        log::warn!("non-negative decay rate {lambda}: recent liquidity is not favoured");
    }
    let groups = group_by_owner(dataset);
    let end = close_at(dataset, opts);
    let score = |events: &Vec<&PoolEvent>| {
        let mut decay = Decay::new(dataset, lambda);
        let mut total = BigDecimal::zero();
        walk_intervals(events, end, |current, elapsed, last_block| {
            // Exact product: keeps scores linear in liquidity.
            let w = decay.weight(last_block);
            total += BigDecimal::from(current * BigInt::from(elapsed)) * w;
        });
        total
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pairs: Vec<(Address, &Vec<&PoolEvent>)> = groups.iter().map(|(a, v)| (*a, v)).collect();
        pairs.into_par_iter().map(|(a, v)| (a, score(v))).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        groups.iter().map(|(a, v)| (*a, score(v))).collect()
    }
}

/// Un-weighted `Σ L · Δblocks` per owner.
pub fn raw_liquidity_time(dataset: &EventDataset, opts: EtwlOptions) -> BTreeMap<Address, BigInt> {
    let end = close_at(dataset, opts);
    group_by_owner(dataset)
        .into_iter()
        .map(|(owner, events)| {
            let mut total = BigInt::zero();
            walk_intervals(&events, end, |current, elapsed, _| total += current * BigInt::from(elapsed));
            (owner, total)
        })
        .collect()
}

fn floored(score: &BigDecimal) -> BigDecimal {
    if is_negative(score) {
        BigDecimal::zero()
    } else {
        score.clone()
    }
}

/// Descending by score (negatives floored at zero), ties by ascending address.
pub fn rank_all(scores: &BTreeMap<Address, BigDecimal>) -> Vec<EtwlEntry> {
    let negatives = scores.values().filter(|s| is_negative(s)).count();
    if negatives > 0 {
        log::warn!("{negatives} owner(s) with negative time-weighted liquidity floored at 0");
    }
    let mut rows: Vec<(Address, BigDecimal)> = scores.iter().map(|(a, s)| (*a, floored(s))).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.into_iter()
        .enumerate()
        .map(|(i, (owner, score))| EtwlEntry {
            owner,
            score,
            rank: i + 1,
        })
        .collect()
}

/// Top `k` of [`rank_all`].
pub fn rank_lps(scores: &BTreeMap<Address, BigDecimal>, k: usize) -> Result<Vec<EtwlEntry>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut all = rank_all(scores);
    all.truncate(k);
    Ok(all)
}

/// `rank,owner,etwl_score` with a header line.
pub fn ranking_to_csv(entries: &[EtwlEntry]) -> String {
    let mut out = String::from("rank,owner,etwl_score\n");
    for e in entries {
        out.push_str(&format!("{},{},{}\n", e.rank, e.owner, decimal::fmt(&e.score)));
    }
    out
}

/// 1-based ranks in descending value order; tied values share their mean rank.
pub fn average_ranks<T: Ord>(values: &[T]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]].cmp(&values[order[i]]) == Ordering::Equal {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of two rank vectors. Two constant vectors correlate at
/// 1; a constant vector against a varying one gives 0.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    if a.is_empty() {
        return 1.0;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    match (va == 0.0, vb == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        // Same spread: avoids sqrt rounding so identical rankings give exactly 1.
        _ if va == vb => cov / va,
        _ => cov / (va.sqrt() * vb.sqrt()),
    }
}

/// Spearman correlation between time-weighted scores and raw liquidity-time
/// over every owner.
pub fn spearman_vs_raw(scores: &BTreeMap<Address, BigDecimal>, raw: &BTreeMap<Address, BigInt>) -> f64 {
    let weighted: Vec<BigDecimal> = scores.values().map(floored).collect();
    let unweighted: Vec<BigInt> = scores
        .keys()
        .map(|a| raw.get(a).cloned().unwrap_or_default().max(BigInt::zero()))
        .collect();
    pearson(&average_ranks(&weighted), &average_ranks(&unweighted))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: BigDecimal,
    pub spearman: f64,
    /// Fraction of this λ's top-k also in the default-λ top-k.
    pub top_k_overlap_vs_default: f64,
    pub ranking: Vec<EtwlEntry>,
}

/// `-0.5, -1.0, …, -5.0`.
pub fn default_sweep_lambdas() -> Vec<BigDecimal> {
    (1..=10).map(|i| BigDecimal::new(BigInt::from(-5 * i), 1)).collect()
}

pub fn lambda_sweep(
    dataset: &EventDataset,
    lambdas: &[BigDecimal],
    k: usize,
    opts: EtwlOptions,
) -> Result<Vec<SweepRow>> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidArgument("a sweep needs at least two lambda values".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let raw = raw_liquidity_time(dataset, opts);
    let reference: BTreeSet<Address> = rank_lps(&compute_etwl_with(dataset, &default_lambda(), opts), k)?
        .into_iter()
        .map(|e| e.owner)
        .collect();
    lambdas
        .iter()
        .map(|lambda| {
            let scores = compute_etwl_with(dataset, lambda, opts);
            let ranking = rank_lps(&scores, k)?;
            let overlap = ranking.iter().filter(|e| reference.contains(&e.owner)).count();
            Ok(SweepRow {
                lambda: lambda.clone(),
                spearman: spearman_vs_raw(&scores, &raw),
                top_k_overlap_vs_default: overlap as f64 / ranking.len().max(1) as f64,
                ranking,
            })
        })
        .collect()
}

/// `lambda,spearman,top_k_overlap_vs_default` with a header line.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda,spearman,top_k_overlap_vs_default\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            decimal::fmt(&r.lambda),
            r.spearman,
            r.top_k_overlap_vs_default
        ));
    }
    out
}
