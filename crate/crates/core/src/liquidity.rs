//! Per-tick net liquidity and the cumulative active-liquidity profile.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;

use crate::types::{Address, EventDataset, EventKind, PoolEvent};

/// Sorted initialized ticks with the running sum of liquidityNet.
///
/// `cumulative[i]` is the active liquidity for prices in
/// `[ticks[i], ticks[i + 1])`. Every tick touched by an event is present,
/// including ticks whose net delta cancels to zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LiquidityProfile {
    ticks: Vec<i32>,
    cumulative: Vec<BigInt>,
    excluded_lp: Option<Address>,
}

/// Aggregates liquidityNet per tick, skipping events owned by `excluded`.
pub fn net_deltas<'a>(
    events: impl IntoIterator<Item = &'a PoolEvent>,
    excluded: Option<&Address>,
) -> BTreeMap<i32, BigInt> {
    let mut net: BTreeMap<i32, BigInt> = BTreeMap::new();
    for e in events {
        if excluded == Some(&e.owner) {
            continue;
        }
        let delta = BigInt::from(e.liquidity);
        let (at_lower, at_upper) = match e.kind {
            EventKind::Mint => (delta.clone(), -delta),
            EventKind::Burn => (-delta.clone(), delta),
        };
        *net.entry(e.tick_lower).or_default() += at_lower;
        *net.entry(e.tick_upper).or_default() += at_upper;
    }
    net
}

impl LiquidityProfile {
    pub fn build(dataset: &EventDataset, excluded_lp: Option<&Address>) -> Self {
        Self::from_events(dataset.events(), excluded_lp)
    }

    pub fn from_events<'a>(events: impl IntoIterator<Item = &'a PoolEvent>, excluded_lp: Option<&Address>) -> Self {
        let mut profile = Self::from_net_deltas(&net_deltas(events, excluded_lp));
        profile.excluded_lp = excluded_lp.copied();
        profile
    }

    pub fn from_net_deltas(net: &BTreeMap<i32, BigInt>) -> Self {
        let mut running = BigInt::zero();
        let mut ticks = Vec::with_capacity(net.len());
        let mut cumulative = Vec::with_capacity(net.len());
        for (tick, delta) in net {
            running += delta;
            ticks.push(*tick);
            cumulative.push(running.clone());
        }
        LiquidityProfile {
            ticks,
            cumulative,
            excluded_lp: None,
        }
    }

    pub fn ticks(&self) -> &[i32] {
        &self.ticks
    }

    pub fn cumulative(&self) -> &[BigInt] {
        &self.cumulative
    }

    pub fn excluded_lp(&self) -> Option<Address> {
        self.excluded_lp
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    /// Recovers liquidityNet per tick from the prefix sums.
    pub fn net_deltas(&self) -> BTreeMap<i32, BigInt> {
        let mut prev = BigInt::zero();
        let mut out = BTreeMap::new();
        for (tick, cum) in self.ticks.iter().zip(&self.cumulative) {
            out.insert(*tick, cum - &prev);
            prev = cum.clone();
        }
        out
    }

    fn index_at(&self, tick: i32) -> Option<usize> {
        // Greatest initialized tick <= `tick`.
        match self.ticks.binary_search(&tick) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    /// Signed cumulative value at `tick` (may be negative under exclusion).
    pub fn raw_at(&self, tick: i32) -> BigInt {
        self.index_at(tick)
            .map(|i| self.cumulative[i].clone())
            .unwrap_or_default()
    }

    /// Active liquidity at `tick`, clamped to zero when the reconstructed value
    /// is negative. Use [`is_clamped_at`](Self::is_clamped_at) to detect the clamp.
    pub fn active_liquidity_at(&self, tick: i32) -> BigUint {
        match self.index_at(tick) {
            Some(i) => self.cumulative[i].to_biguint().unwrap_or_default(),
            None => BigUint::zero(),
        }
    }

    pub fn is_clamped_at(&self, tick: i32) -> bool {
        self.index_at(tick)
            .map(|i| self.cumulative[i].sign() == Sign::Minus)
            .unwrap_or(false)
    }

    /// Number of initialized ticks whose cumulative value is negative.
    pub fn clamped_tick_count(&self) -> usize {
        self.cumulative.iter().filter(|c| c.sign() == Sign::Minus).count()
    }

    /// A copy with `liquidity` removed on `[tick_lower, tick_upper)`.
    pub fn with_range_removed(&self, tick_lower: i32, tick_upper: i32, liquidity: &BigInt) -> Self {
        let mut net = self.net_deltas();
        *net.entry(tick_lower).or_default() -= liquidity;
        *net.entry(tick_upper).or_default() += liquidity;
        let mut out = Self::from_net_deltas(&net);
        out.excluded_lp = self.excluded_lp;
        out
    }

    /// Minimum active liquidity over `[from, to]`, considering the value at
    /// `from` and at every initialized tick inside the window.
    pub fn min_active_over(&self, from: i32, to: i32) -> BigUint {
        let mut min = self.active_liquidity_at(from);
        let start = self.ticks.partition_point(|t| *t <= from);
        for i in start..self.ticks.len() {
            if self.ticks[i] > to {
                break;
            }
            let here = self.cumulative[i].to_biguint().unwrap_or_default();
            if here < min {
                min = here;
            }
        }
        min
    }

    /// `tick,cumulative_liquidity` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick,cumulative_liquidity\n");
        for (t, c) in self.ticks.iter().zip(&self.cumulative) {
            let _ = writeln!(out, "{t},{c}");
        }
        out
    }
}
