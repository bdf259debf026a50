//! Size- and activity-based whale detectors used for comparison.
//!
//! * B1: total minted liquidity at or above the 99th percentile.
//! * B2: peak outstanding liquidity at or above a share of the pool's peak
//!   active liquidity.
//! * B3: B1's size condition and turnover at or above the 95th percentile,
//!   where turnover is `(minted + burned) / final outstanding` (peak
//!   outstanding when the final balance is zero).
//!
//! Percentiles use the inclusive nearest-rank rule.

use std::collections::{BTreeMap, BTreeSet};

use bigdecimal::BigDecimal;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::types::{Address, EventDataset, EventKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaselineFlags {
    pub b1: bool,
    pub b2: bool,
    pub b3: bool,
}

impl BaselineFlags {
    pub fn any(&self) -> bool {
        self.b1 || self.b2 || self.b3
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OwnerActivity {
    pub minted: BigInt,
    pub burned: BigInt,
    pub peak_outstanding: BigInt,
    pub final_outstanding: BigInt,
}

impl OwnerActivity {
    /// Zero when both the final and peak balances are non-positive.
    pub fn turnover(&self) -> BigRational {
        let denom = if self.final_outstanding.is_positive() {
            &self.final_outstanding
        } else if self.peak_outstanding.is_positive() {
            &self.peak_outstanding
        } else {
            return BigRational::zero();
        };
        BigRational::new(&self.minted + &self.burned, denom.clone())
    }
}

pub fn owner_activity(dataset: &EventDataset) -> BTreeMap<Address, OwnerActivity> {
    let mut out: BTreeMap<Address, OwnerActivity> = BTreeMap::new();
    for e in dataset.events() {
        let a = out.entry(e.owner).or_default();
        let l = BigInt::from(e.liquidity);
        match e.kind {
            EventKind::Mint => {
                a.minted += &l;
                a.final_outstanding += l;
            }
            EventKind::Burn => {
                a.burned += &l;
                a.final_outstanding -= l;
            }
        }
        if a.final_outstanding > a.peak_outstanding {
            a.peak_outstanding = a.final_outstanding.clone();
        }
    }
    out
}

/// Largest aggregate outstanding liquidity over the event history.
pub fn peak_pool_liquidity(dataset: &EventDataset) -> BigInt {
    let mut running = BigInt::zero();
    let mut peak = BigInt::zero();
    for e in dataset.events() {
        running += e.signed_liquidity();
        if running > peak {
            peak = running.clone();
        }
    }
    peak
}

/// Inclusive nearest-rank percentile (`pct` in 1..=100) of `values`.
pub fn nearest_rank<T: Ord + Clone>(values: &[T], pct: u32) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort();
    let n = sorted.len();
    let rank = (pct as usize * n).div_ceil(100).clamp(1, n);
    Some(sorted[rank - 1].clone())
}

fn at_or_above<T: Ord + Clone>(values: &BTreeMap<Address, T>, pct: u32) -> BTreeSet<Address> {
    let all: Vec<T> = values.values().cloned().collect();
    match nearest_rank(&all, pct) {
        Some(threshold) => values
            .iter()
            .filter(|(_, v)| **v >= threshold)
            .map(|(a, _)| *a)
            .collect(),
        None => BTreeSet::new(),
    }
}

pub fn baseline_b1(dataset: &EventDataset) -> BTreeSet<Address> {
    let sizes: BTreeMap<Address, BigInt> = owner_activity(dataset)
        .into_iter()
        .map(|(a, s)| (a, s.minted))
        .collect();
    at_or_above(&sizes, 99)
}

/// `share` is a fraction, e.g. 0.01 for 1%.
pub fn baseline_b2(dataset: &EventDataset, share: &BigDecimal) -> BTreeSet<Address> {
    let peak = peak_pool_liquidity(dataset);
    if !peak.is_positive() {
        return BTreeSet::new();
    }
    let cutoff = share * BigDecimal::from(peak);
    owner_activity(dataset)
        .into_iter()
        .filter(|(_, s)| s.peak_outstanding.is_positive() && BigDecimal::from(s.peak_outstanding.clone()) >= cutoff)
        .map(|(a, _)| a)
        .collect()
}

pub fn baseline_b3(dataset: &EventDataset) -> BTreeSet<Address> {
    let activity = owner_activity(dataset);
    let sizes: BTreeMap<Address, BigInt> = activity.iter().map(|(a, s)| (*a, s.minted.clone())).collect();
    let turnover: BTreeMap<Address, BigRational> = activity.iter().map(|(a, s)| (*a, s.turnover())).collect();
    let big = at_or_above(&sizes, 99);
    let busy = at_or_above(&turnover, 95);
    big.intersection(&busy).copied().collect()
}

pub fn baseline_flags(dataset: &EventDataset, b2_share: &BigDecimal) -> BTreeMap<Address, BaselineFlags> {
    let b1 = baseline_b1(dataset);
    let b2 = baseline_b2(dataset, b2_share);
    let b3 = baseline_b3(dataset);
    dataset
        .owners()
        .into_iter()
        .map(|a| {
            (
                a,
                BaselineFlags {
                    b1: b1.contains(&a),
                    b2: b2.contains(&a),
                    b3: b3.contains(&a),
                },
            )
        })
        .collect()
}
