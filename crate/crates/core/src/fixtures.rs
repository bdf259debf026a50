//! Deterministic synthetic datasets for tests, benchmarks and the demo.

use crate::rng::SplitMix64;
use crate::types::{Address, EventDataset, EventKind, PoolEvent, TxHash, U256};

pub fn pool() -> Address {
    Address::from_index(0xfee0)
}

/// Builds events with increasing log indices per block.
#[derive(Debug, Default)]
pub struct EventBuilder {
    events: Vec<PoolEvent>,
}

impl EventBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, kind: EventKind, owner: Address, lo: i32, hi: i32, liquidity: u128, block: u64) -> &mut Self {
        let log_index = self.events.iter().filter(|e| e.block_number == block).count() as u32;
        let mut tx = [0u8; 32];
        tx[..8].copy_from_slice(&block.to_be_bytes());
        tx[8..12].copy_from_slice(&log_index.to_be_bytes());
        self.events.push(PoolEvent {
            kind,
            owner,
            sender: owner,
            tick_lower: lo,
            tick_upper: hi,
            liquidity,
            amount0: U256::default(),
            amount1: U256::default(),
            block_number: block,
            log_index,
            tx_hash: TxHash(tx),
        });
        self
    }

    pub fn mint(&mut self, owner: Address, lo: i32, hi: i32, liquidity: u128, block: u64) -> &mut Self {
        self.push(EventKind::Mint, owner, lo, hi, liquidity, block)
    }

    pub fn burn(&mut self, owner: Address, lo: i32, hi: i32, liquidity: u128, block: u64) -> &mut Self {
        self.push(EventKind::Burn, owner, lo, hi, liquidity, block)
    }

    pub fn events(&self) -> &[PoolEvent] {
        &self.events
    }

    pub fn build(&self) -> EventDataset {
        EventDataset::new(pool(), self.events.clone()).expect("fixture events are valid")
    }
}

/// One owner supplies almost all in-range liquidity on a single position.
#[derive(Debug, Clone)]
pub struct Linchpin {
    pub dataset: EventDataset,
    pub whale: Address,
    pub whale_liquidity: u128,
    pub tick_lower: i32,
    pub tick_upper: i32,
}

pub fn linchpin() -> Linchpin {
    let whale = Address::from_index(1);
    let whale_liquidity: u128 = 100_000_000_000_000_000_000;
    let mut b = EventBuilder::new();
    b.mint(whale, -600, 600, whale_liquidity, 10);
    let mut rng = SplitMix64::new(0x11c4);
    for i in 0..30u64 {
        let owner = Address::from_index(100 + i);
        let lo = -600 + 60 * rng.below(10) as i32;
        let hi = lo + 60 * (1 + rng.below(10) as i32);
        let l = 1_000_000_000_000_000u128 * (1 + rng.below(5) as u128);
        let block = 20 + 10 * i;
        b.mint(owner, lo, hi, l, block);
        if i % 3 == 0 {
            b.burn(owner, lo, hi, l / 2, block + 5);
        }
    }
    Linchpin {
        dataset: b.build(),
        whale,
        whale_liquidity,
        tick_lower: -600,
        tick_upper: 600,
    }
}

/// Owner B holds `l_b` for blocks 0–100; owner A holds `l_b / 5` for
/// blocks 900–1000. B leads on raw liquidity-time, A on recency.
pub fn two_owner_sweep(l_b: u128) -> (EventDataset, Address, Address) {
    let recent = Address::from_index(0xa);
    let historic = Address::from_index(0xb);
    let mut b = EventBuilder::new();
    b.mint(historic, -60, 60, l_b, 0)
        .burn(historic, -60, 60, l_b, 100)
        .mint(recent, -60, 60, l_b / 5, 900)
        .burn(recent, -60, 60, l_b / 5, 1000);
    (b.build(), recent, historic)
}

/// A single owner provides all liquidity.
pub fn sole_lp() -> (EventDataset, Address) {
    let owner = Address::from_index(5);
    let mut b = EventBuilder::new();
    b.mint(owner, -120, 120, 5_000_000_000_000_000_000, 1)
        .mint(owner, -60, 60, 1_000_000_000_000_000_000, 2);
    (b.build(), owner)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    pub events: usize,
    pub owners: u64,
    pub seed: u64,
    pub tick_spacing: i32,
    /// Ticks are drawn from `[-tick_span, tick_span]`.
    pub tick_span: i32,
    /// Chance (per mille) that an event burns part of an open position.
    pub burn_per_mille: u64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            events: 10_000,
            owners: 200,
            seed: 7,
            tick_spacing: 10,
            tick_span: 3000,
            burn_per_mille: 350,
        }
    }
}

/// Random but well-formed history: burns never exceed what the owner holds
/// on that exact position, so every per-owner per-tick contribution stays
/// non-negative.
pub fn random_dataset(spec: RandomSpec) -> EventDataset {
    assert!(spec.events > 0 && spec.owners > 0 && spec.tick_spacing > 0 && spec.tick_span >= spec.tick_spacing);
    let mut rng = SplitMix64::new(spec.seed);
    let slots = (2 * spec.tick_span / spec.tick_spacing) as u64;
    // (owner, lower, upper, outstanding)
    let mut open: Vec<(Address, i32, i32, u128)> = Vec::new();
    let mut b = EventBuilder::new();
    let mut block = 1_000u64;
    for _ in 0..spec.events {
        block += rng.below(4);
        if !open.is_empty() && rng.below(1000) < spec.burn_per_mille {
            let idx = rng.below(open.len() as u64) as usize;
            let (owner, lo, hi, held) = open[idx];
            let amount = if rng.below(3) == 0 {
                held
            } else {
                (held / (2 + rng.below(4) as u128)).max(1)
            };
            b.burn(owner, lo, hi, amount, block);
            if amount == held {
                open.swap_remove(idx);
            } else {
                open[idx].3 -= amount;
            }
        } else {
            let owner = Address::from_index(1 + rng.below(spec.owners));
            let a = rng.below(slots) as i32;
            let width = 1 + rng.below((slots - a as u64).clamp(1, 60)) as i32;
            let lo = -spec.tick_span + a * spec.tick_spacing;
            let hi = lo + width * spec.tick_spacing;
            let magnitude = 10u128.pow(12 + rng.below(7) as u32);
            let l = magnitude * (1 + rng.below(9) as u128);
            b.mint(owner, lo, hi, l, block);
            open.push((owner, lo, hi, l));
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liquidity::LiquidityProfile;

    #[test]
    fn random_is_deterministic_and_well_formed() {
        let spec = RandomSpec {
            events: 500,
            owners: 20,
            ..Default::default()
        };
        let a = random_dataset(spec);
        assert_eq!(a, random_dataset(spec));
        assert_eq!(a.len(), 500);
        for owner in a.owners() {
            let own = LiquidityProfile::from_events(a.events().iter().filter(|e| e.owner == owner), None);
            assert_eq!(own.clamped_tick_count(), 0);
        }
        for e in a.events() {
            assert!(e.tick_lower >= -3000 && e.tick_upper <= 3000);
            assert_eq!(e.tick_lower % 10, 0);
        }
    }

    #[test]
    fn linchpin_shape() {
        let fx = linchpin();
        let p = LiquidityProfile::build(&fx.dataset, None);
        let total = p.active_liquidity_at(0);
        assert!(total >= num_bigint::BigUint::from(fx.whale_liquidity));
        assert!(total * 99u32 <= num_bigint::BigUint::from(fx.whale_liquidity) * 100u32);
    }
}
