//! Independent reference implementations used by the property and
//! acceptance suites. Everything here is exact rational arithmetic or a
//! deliberately naive restatement of the pipeline.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use bigdecimal::BigDecimal;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use lsis_core::counterfactual::LsisValue;
use lsis_core::decimal;
use lsis_core::liquidity::LiquidityProfile;
use lsis_core::swap_math::{price_impact, ImpactModel, SwapDirection, SyntheticSwap};
use lsis_core::{Address, EventDataset, EventKind, PoolEvent};

pub fn rat_from_decimal(d: &BigDecimal) -> BigRational {
    let (digits, scale) = d.as_bigint_and_exponent();
    if scale >= 0 {
        BigRational::new(digits, num_traits::pow(BigInt::from(10), scale as usize))
    } else {
        BigRational::from_integer(digits * num_traits::pow(BigInt::from(10), (-scale) as usize))
    }
}

pub fn rat_from_uint(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

/// Verbatim price-impact formulas on exact rationals; `None` where the
/// formula leaves its domain (zero liquidity, non-positive post price).
pub fn impact_oracle(swap: &SyntheticSwap, liquidity: &BigUint) -> Option<BigRational> {
    if liquidity.is_zero() {
        return None;
    }
    let l = rat_from_uint(liquidity);
    let q96 = BigRational::from_integer(BigInt::one() << 96usize);
    let pi = rat_from_uint(swap.sqrt_price_x96.raw()) / q96;
    let hundred = BigRational::from_integer(100.into());
    let pi2 = &pi * &pi;
    match swap.direction() {
        SwapDirection::Token0In => {
            let dx = rat_from_decimal(&swap.amount0_in);
            let denom = &l - &dx * &pi;
            if !denom.is_positive() {
                return None;
            }
            let pf = &l * &pi / denom;
            Some((&pi2 - &pf * &pf) / &pi2 * hundred)
        }
        SwapDirection::Token1In => {
            let dy = rat_from_decimal(&swap.amount1_in);
            let pf = &pi - dy / &l;
            if !pf.is_positive() {
                return None;
            }
            Some((&pf * &pf - &pi2) / &pi2 * hundred)
        }
    }
}

/// `|a − b| ≤ tol · |b|` with `a` decimal and `b` rational.
pub fn rel_close(a: &BigDecimal, b: &BigRational, tol: &BigRational) -> bool {
    let diff = (rat_from_decimal(a) - b).abs();
    if b.is_zero() {
        return diff <= *tol;
    }
    diff <= tol * b.abs()
}

pub fn pow10_neg(n: u32) -> BigRational {
    BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), n as usize))
}

/// `1.0001^tick` by square-and-multiply on rationals rounded to 200
/// digits (relative error far below 1e-150 for any valid tick).
pub fn tick_price_oracle(tick: i32) -> BigRational {
    let mut base = BigRational::new(10001.into(), 10000.into());
    let mut acc = BigRational::one();
    let mut n = tick.unsigned_abs();
    while n > 0 {
        if n & 1 == 1 {
            acc = round_rel(&(&acc * &base), 200);
        }
        base = round_rel(&(&base * &base), 200);
        n >>= 1;
    }
    if tick < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Rounds a positive rational to `digits` significant digits.
fn round_rel(r: &BigRational, digits: u32) -> BigRational {
    let int_digits = r.to_integer().to_string().len() as i64;
    let shift = digits as i64 - int_digits;
    let ten = BigInt::from(10);
    if shift >= 0 {
        round_rat(r, shift as u32)
    } else {
        let unit = BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
        (r / &unit).round() * unit
    }
}

/// `e^x` by Taylor series on rationals until the term drops below `10^-digits`.
pub fn exp_oracle(x: &BigRational, digits: u32) -> BigRational {
    // e^x = (e^(x/2^s))^(2^s) keeps the series short for larger |x|.
    let mut s = 0u32;
    let mut y = x.clone();
    while y.abs() > BigRational::new(1.into(), 8.into()) {
        y /= BigRational::from_integer(2.into());
        s += 1;
    }
    let eps = pow10_neg(digits + 10 + s);
    let mut sum = BigRational::one();
    let mut term = BigRational::one();
    let mut n = 1u32;
    loop {
        term = term * &y / BigRational::from_integer(n.into());
        sum += &term;
        if term.abs() < eps {
            break;
        }
        n += 1;
        // keep the rationals small
        if n % 8 == 0 {
            sum = round_rat(&sum, digits + 20 + s);
            term = round_rat(&term, digits + 40 + s);
        }
    }
    for _ in 0..s {
        sum = round_rat(&(&sum * &sum), digits + 20 + s);
    }
    sum
}

fn round_rat(r: &BigRational, digits: u32) -> BigRational {
    let scale = num_traits::pow(BigInt::from(10), digits as usize);
    let scaled = (r * BigRational::from_integer(scale.clone())).round();
    scaled / BigRational::from_integer(scale)
}

/// Agreement to `digits` significant digits.
pub fn sig_digits_match(a: &BigDecimal, b: &BigRational, digits: u32) -> bool {
    rel_close(a, b, &pow10_neg(digits))
}

/// Hash-map accumulation of liquidityNet, then a sorted prefix sum.
pub fn profile_oracle(events: &[PoolEvent], excluded: Option<&Address>) -> Vec<(i32, BigInt)> {
    let mut net: HashMap<i32, BigInt> = HashMap::new();
    for e in events {
        if Some(&e.owner) == excluded {
            continue;
        }
        let l = BigInt::from(e.liquidity);
        let sign = if e.kind == EventKind::Mint { 1 } else { -1 };
        *net.entry(e.tick_lower).or_insert_with(BigInt::zero) += &l * sign;
        *net.entry(e.tick_upper).or_insert_with(BigInt::zero) -= &l * sign;
    }
    let mut ticks: Vec<i32> = net.keys().copied().collect();
    ticks.sort_unstable();
    let mut running = BigInt::zero();
    ticks
        .into_iter()
        .map(|t| {
            running += &net[&t];
            (t, running.clone())
        })
        .collect()
}

/// Straight-line restatement of the event walk: per owner, per consecutive
/// event pair, `L · Δ · exp(λ(1 − t))` with the exponential from
/// [`exp_oracle`].
pub fn etwl_oracle(dataset: &EventDataset, lambda: &BigRational, digits: u32) -> BTreeMap<Address, BigRational> {
    let min = dataset.min_block();
    let range = dataset.max_block() - min;
    let mut out = BTreeMap::new();
    for owner in dataset.owners() {
        let evs: Vec<&PoolEvent> = dataset.events().iter().filter(|e| e.owner == owner).collect();
        let mut total = BigRational::zero();
        let mut current = BigInt::zero();
        let mut last = 0u64;
        for (i, e) in evs.iter().enumerate() {
            if i > 0 {
                let t = if range == 0 {
                    BigRational::zero()
                } else {
                    BigRational::new(BigInt::from(last - min), BigInt::from(range))
                };
                let w = exp_oracle(&(lambda * (BigRational::one() - t)), digits);
                total += BigRational::from_integer(&current * BigInt::from(e.block_number - last)) * w;
            }
            current += e.signed_liquidity();
            last = e.block_number;
        }
        out.insert(owner, total);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveReport {
    pub owner: Address,
    pub pi_baseline: BigDecimal,
    pub pi_excluded: Option<BigDecimal>,
    pub lsis: LsisValue,
    pub skipped: usize,
}

/// One owner's exclusion evaluated swap by swap with no caching or threads.
pub fn naive_exclusion(
    dataset: &EventDataset,
    swaps: &[SyntheticSwap],
    owner: &Address,
    model: ImpactModel,
) -> NaiveReport {
    let base = LiquidityProfile::from_events(dataset.events(), None);
    let filtered: Vec<PoolEvent> = dataset.events().iter().filter(|e| e.owner != *owner).cloned().collect();
    let excl = LiquidityProfile::from_events(&filtered, None);
    let mut sb = BigDecimal::zero();
    let mut se = BigDecimal::zero();
    let mut n = 0usize;
    let mut skipped = 0usize;
    let mut any_base = false;
    for s in swaps {
        let b = price_impact(s, &base.active_liquidity_at(s.tick), model);
        let e = price_impact(s, &excl.active_liquidity_at(s.tick), model);
        any_base |= b.is_ok();
        match (b, e) {
            (Ok(b), Ok(e)) => {
                sb += b.magnitude;
                se += e.magnitude;
                n += 1;
            }
            _ => skipped += 1,
        }
    }
    assert!(any_base, "baseline has no computable swap");
    if n == 0 {
        let mut all = BigDecimal::zero();
        let mut m = 0u64;
        for s in swaps {
            if let Ok(b) = price_impact(s, &base.active_liquidity_at(s.tick), model) {
                all += b.magnitude;
                m += 1;
            }
        }
        return NaiveReport {
            owner: *owner,
            pi_baseline: decimal::div(&all, &BigDecimal::from(m)),
            pi_excluded: None,
            lsis: LsisValue::Unbounded,
            skipped,
        };
    }
    let count = BigDecimal::from(n as u64);
    let pb = decimal::div(&sb, &count);
    let pe = decimal::div(&se, &count);
    NaiveReport {
        owner: *owner,
        lsis: LsisValue::relative(&pb, &pe),
        pi_baseline: pb,
        pi_excluded: Some(pe),
        skipped,
    }
}
