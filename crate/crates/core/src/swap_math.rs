//! Fixed-point price math, single-tick price impact and synthetic swap sets.
//!
//! Price impact follows the single-tick model: for a token0-in swap of size
//! `ΔX` against liquidity `L` at square-root price `√P_i`,
//! `√P_f = L·√P_i / (L − ΔX·√P_i)` and `PI = (P_i − P_f) / P_i × 100`; for a
//! token1-in swap of size `ΔY`, `√P_f = √P_i − ΔY / L` and
//! `PI = (P_f − P_i) / P_i × 100`, where `P = (√P)²`.
//!
//! Both are evaluated in cancellation-free form:
//! token0: `PI = −D(2L − D) / (L − D)² × 100` with `D = ΔX·√P_i`;
//! token1: `PI = −e(2 − e) × 100` with `e = ΔY / (L·√P_i)`.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use std::sync::OnceLock;

use bigdecimal::{BigDecimal, Context};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::decimal::{self, div, is_negative, is_positive, is_zero, mul};
use crate::error::{Error, Result};
use crate::liquidity::LiquidityProfile;
use crate::rng::SplitMix64;
use crate::types::check_tick;

pub fn q96() -> &'static BigUint {
    static Q96: OnceLock<BigUint> = OnceLock::new();
    Q96.get_or_init(|| BigUint::one() << 96usize)
}

fn five_pow_96() -> &'static BigInt {
    static P: OnceLock<BigInt> = OnceLock::new();
    P.get_or_init(|| num_traits::pow(BigInt::from(5u8), 96))
}

/// √P scaled by 2^96, as stored on chain.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SqrtPriceX96(BigUint);

impl SqrtPriceX96 {
    pub fn new(raw: BigUint) -> Result<Self> {
        if raw.is_zero() {
            return Err(Error::InvalidArgument("sqrtPriceX96 must be positive".into()));
        }
        if raw.bits() > 161 || (raw.bits() == 161 && raw != (BigUint::one() << 160usize)) {
            return Err(Error::InvalidArgument("sqrtPriceX96 exceeds 2^160".into()));
        }
        Ok(SqrtPriceX96(raw))
    }

    pub fn raw(&self) -> &BigUint {
        &self.0
    }

    /// Exact `raw / 2^96` (a terminating decimal).
    pub fn to_sqrt_price(&self) -> BigDecimal {
        BigDecimal::new(BigInt::from(self.0.clone()) * five_pow_96(), 96)
    }

    /// Inverse of [`to_sqrt_price`](Self::to_sqrt_price), rounded to the nearest integer.
    pub fn from_sqrt_price(sqrt_price: &BigDecimal) -> Result<Self> {
        if !is_positive(sqrt_price) {
            return Err(Error::InvalidArgument("sqrt price must be positive".into()));
        }
        let scaled = sqrt_price * BigDecimal::from(BigInt::from(q96().clone()));
        let rounded = scaled.with_scale_round(0, bigdecimal::RoundingMode::HalfEven);
        let (digits, _) = rounded.into_bigint_and_exponent();
        let raw = digits
            .to_biguint()
            .ok_or_else(|| Error::InvalidArgument("negative sqrt price".into()))?;
        Self::new(raw)
    }
}

impl fmt::Debug for SqrtPriceX96 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SqrtPriceX96({})", self.0)
    }
}

impl fmt::Display for SqrtPriceX96 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `1.0001^tick` to working precision.
pub fn tick_to_price(tick: i32) -> Result<BigDecimal> {
    check_tick(tick as i64)?;
    static WIDE: OnceLock<Context> = OnceLock::new();
    let wide = WIDE.get_or_init(|| Context::default().with_prec(decimal::PRECISION + 20).expect("precision"));
    let base = BigDecimal::new(BigInt::from(10001u32), 4);
    let positive = base.powi_with_context(tick.unsigned_abs() as i64, wide);
    let value = if tick < 0 {
        positive.inverse_with_context(wide)
    } else {
        positive
    };
    Ok(decimal::round(value))
}

fn check_sqrt_prices(a: &BigDecimal, b: &BigDecimal) -> Result<()> {
    if !is_positive(a) || !is_positive(b) {
        return Err(Error::InvalidArgument("sqrt prices must be positive".into()));
    }
    Ok(())
}

fn check_liquidity(l: &BigDecimal) -> Result<()> {
    if is_negative(l) {
        return Err(Error::InvalidArgument("liquidity must be non-negative".into()));
    }
    Ok(())
}

/// `Δx = L·|1/√P_b − 1/√P_a|`
pub fn swap_volume_dx(liquidity: &BigDecimal, sqrt_pa: &BigDecimal, sqrt_pb: &BigDecimal) -> Result<BigDecimal> {
    check_liquidity(liquidity)?;
    check_sqrt_prices(sqrt_pa, sqrt_pb)?;
    if sqrt_pa == sqrt_pb {
        return Ok(BigDecimal::zero());
    }
    // 1/a − 1/b = (b − a)/(a·b) avoids subtracting two rounded reciprocals.
    let diff = (sqrt_pb - sqrt_pa).abs();
    Ok(mul(liquidity, &div(&diff, &mul(sqrt_pa, sqrt_pb))))
}

/// `Δy = L·|√P_b − √P_a|`
pub fn swap_volume_dy(liquidity: &BigDecimal, sqrt_pa: &BigDecimal, sqrt_pb: &BigDecimal) -> Result<BigDecimal> {
    check_liquidity(liquidity)?;
    check_sqrt_prices(sqrt_pa, sqrt_pb)?;
    Ok(mul(liquidity, &(sqrt_pb - sqrt_pa).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwapDirection {
    /// Sell token0, buy token1.
    Token0In,
    /// Sell token1, buy token0.
    Token1In,
}

/// Which price-update rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImpactModel {
    /// `√P_f = L√P_i/(L − ΔX√P_i)` and `√P_f = √P_i − ΔY/L`.
    #[default]
    Symmetric,
    /// Protocol direction: `√P_f = L√P_i/(L + ΔX√P_i)` and `√P_f = √P_i + ΔY/L`.
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Mean of |PI|.
    #[default]
    Magnitude,
    /// Mean of signed PI.
    Signed,
}

/// One fixed hypothetical trade inside a single tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSwap {
    pub tick: i32,
    pub amount0_in: BigDecimal,
    pub amount1_in: BigDecimal,
    /// Active liquidity at generation time.
    pub liquidity: BigUint,
    pub sqrt_price_x96: SqrtPriceX96,
}

impl SyntheticSwap {
    pub fn direction(&self) -> SwapDirection {
        if is_zero(&self.amount0_in) && !is_zero(&self.amount1_in) {
            SwapDirection::Token1In
        } else {
            SwapDirection::Token0In
        }
    }

    pub fn is_degenerate(&self) -> bool {
        is_zero(&self.amount0_in) == is_zero(&self.amount1_in)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceImpact {
    /// Signed percentage.
    pub percent: BigDecimal,
    pub magnitude: BigDecimal,
}

impl PriceImpact {
    fn new(percent: BigDecimal) -> Self {
        let percent = if is_zero(&percent) { BigDecimal::zero() } else { percent };
        let magnitude = percent.abs();
        PriceImpact { percent, magnitude }
    }

    pub fn value(&self, averaging: Averaging) -> &BigDecimal {
        match averaging {
            Averaging::Magnitude => &self.magnitude,
            Averaging::Signed => &self.percent,
        }
    }
}

fn hundred() -> &'static BigDecimal {
    static H: OnceLock<BigDecimal> = OnceLock::new();
    H.get_or_init(|| BigDecimal::from(100))
}

/// Price impact of `swap` against `liquidity` at its tick.
///
/// Errors: [`Error::NoLiquidity`] when `liquidity == 0`;
/// [`Error::ExceedsTickCapacity`] when the post-swap √price would be
/// non-positive or the token0 denominator `L − ΔX·√P_i` is not positive.
pub fn price_impact(swap: &SyntheticSwap, liquidity: &BigUint, model: ImpactModel) -> Result<PriceImpact> {
    if liquidity.is_zero() {
        return Err(Error::NoLiquidity);
    }
    let l = decimal::from_biguint(liquidity);
    let sqrt_p = decimal::round(swap.sqrt_price_x96.to_sqrt_price());
    match swap.direction() {
        SwapDirection::Token0In => {
            if is_zero(&swap.amount0_in) {
                return Ok(PriceImpact::new(BigDecimal::zero()));
            }
            let d = mul(&swap.amount0_in, &sqrt_p);
            let (cap, numer) = match model {
                ImpactModel::Symmetric => (&l - &d, mul(&d, &(&l + &l - &d))),
                ImpactModel::Canonical => (&l + &d, mul(&d, &(&l + &l + &d))),
            };
            if !is_positive(&cap) {
                return Err(Error::ExceedsTickCapacity);
            }
            let ratio = div(&numer, &mul(&cap, &cap));
            let pct = mul(&ratio, hundred());
            Ok(PriceImpact::new(match model {
                ImpactModel::Symmetric => -pct,
                ImpactModel::Canonical => pct,
            }))
        }
        SwapDirection::Token1In => {
            let e = div(&swap.amount1_in, &mul(&l, &sqrt_p));
            let two = BigDecimal::from(2);
            let pct = match model {
                ImpactModel::Symmetric => {
                    if e >= BigDecimal::one() {
                        return Err(Error::ExceedsTickCapacity);
                    }
                    -mul(&mul(&e, &(&two - &e)), hundred())
                }
                ImpactModel::Canonical => mul(&mul(&e, &(&two + &e)), hundred()),
            };
            Ok(PriceImpact::new(pct))
        }
    }
}

/// Inclusive arithmetic grid of reserve fractions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapGrid {
    pub start: BigDecimal,
    pub end: BigDecimal,
    pub step: BigDecimal,
}

impl SwapGrid {
    pub fn new(start: BigDecimal, end: BigDecimal, step: BigDecimal) -> Result<Self> {
        if !is_positive(&start) || start > end {
            return Err(Error::InvalidArgument(format!(
                "swap grid requires 0 < start <= end (got start={start}, end={end})"
            )));
        }
        if !is_positive(&step) {
            return Err(Error::InvalidArgument(format!("swap grid step must be positive (got {step})")));
        }
        Ok(SwapGrid { start, end, step })
    }

    /// 0.0001 to 0.01 in steps of 0.001.
    pub fn default_grid() -> Self {
        Self::new(
            BigDecimal::new(1.into(), 4),
            BigDecimal::new(1.into(), 2),
            BigDecimal::new(1.into(), 3),
        )
        .expect("valid default grid")
    }

    /// Parses `start,end,step`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!("grid must be start,end,step: {text:?}")));
        }
        Self::new(decimal::parse(parts[0])?, decimal::parse(parts[1])?, decimal::parse(parts[2])?)
    }

    pub fn percentages(&self) -> Vec<BigDecimal> {
        let mut out = Vec::new();
        let mut p = self.start.clone();
        while p <= self.end {
            out.push(p.clone());
            p += &self.step;
        }
        out
    }
}

impl fmt::Display for SwapGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.start, self.end, self.step)
    }
}

/// Builds the fixed swap set: for each initialized tick with positive active
/// liquidity (ascending), draw one √price uniformly from `[2^95, 2^100]`,
/// estimate reserves `L/√p` and `L·√p`, and emit a token0-in and a token1-in
/// swap for every grid fraction.
pub fn generate_synthetic_swaps(profile: &LiquidityProfile, grid: &SwapGrid, seed: u64) -> Vec<SyntheticSwap> {
    if profile.is_empty() {
        log::warn!("empty liquidity profile: no synthetic swaps generated");
        return Vec::new();
    }
    let lo = BigUint::one() << 95usize;
    let hi = BigUint::one() << 100usize;
    let fractions = grid.percentages();
    let mut rng = SplitMix64::new(seed);
    let mut swaps = Vec::new();
    for &tick in profile.ticks() {
        let liquidity = profile.active_liquidity_at(tick);
        if liquidity.is_zero() {
            continue;
        }
        let raw = rng.uniform_biguint_inclusive(&lo, &hi);
        let price = SqrtPriceX96::new(raw).expect("draw is within (0, 2^160]");
        let sqrt_p = decimal::round(price.to_sqrt_price());
        let l = decimal::from_biguint(&liquidity);
        let reserve0 = div(&l, &sqrt_p);
        let reserve1 = mul(&l, &sqrt_p);
        for pct in &fractions {
            swaps.push(SyntheticSwap {
                tick,
                amount0_in: mul(&reserve0, pct),
                amount1_in: BigDecimal::zero(),
                liquidity: liquidity.clone(),
                sqrt_price_x96: price.clone(),
            });
            swaps.push(SyntheticSwap {
                tick,
                amount0_in: BigDecimal::zero(),
                amount1_in: mul(&reserve1, pct),
                liquidity: liquidity.clone(),
                sqrt_price_x96: price.clone(),
            });
        }
    }
    swaps
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpactSummary {
    pub mean: BigDecimal,
    pub evaluated: usize,
    pub skipped: usize,
}

fn mean(sum: &BigDecimal, count: usize) -> BigDecimal {
    div(sum, &BigDecimal::from(count as u64))
}

/// Mean price impact of `swaps` with liquidity re-resolved against `profile`.
/// Uncomputable swaps are skipped and counted.
pub fn calculate_average_pi(
    swaps: &[SyntheticSwap],
    profile: &LiquidityProfile,
    model: ImpactModel,
    averaging: Averaging,
) -> Result<ImpactSummary> {
    if swaps.is_empty() {
        return Err(Error::InvalidArgument("swap set is empty".into()));
    }
    let mut sum = BigDecimal::zero();
    let mut evaluated = 0;
    for swap in swaps {
        let l = profile.active_liquidity_at(swap.tick);
        if let Ok(pi) = price_impact(swap, &l, model) {
            sum += pi.value(averaging);
            evaluated += 1;
        }
    }
    if evaluated == 0 {
        return Err(Error::NoMeasurableImpact(swaps.len()));
    }
    Ok(ImpactSummary {
        mean: mean(&sum, evaluated),
        evaluated,
        skipped: swaps.len() - evaluated,
    })
}

/// Baseline impacts for a fixed swap set, reused across many alternative
/// profiles.
#[derive(Debug, Clone)]
pub struct SwapBook {
    swaps: Vec<SyntheticSwap>,
    liquidity: Vec<BigUint>,
    impacts: Vec<Option<PriceImpact>>,
    model: ImpactModel,
    averaging: Averaging,
}

/// Means over the swaps computable under both the baseline and the
/// alternative profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedSummary {
    pub pi_baseline: BigDecimal,
    pub pi_alternative: BigDecimal,
    /// Swaps in the common set.
    pub evaluated: usize,
    /// Swaps uncomputable under the baseline.
    pub baseline_skipped: usize,
    /// Swaps computable under the baseline but not under the alternative.
    pub exhausted: usize,
}

impl PairedSummary {
    pub fn skipped(&self) -> usize {
        self.baseline_skipped + self.exhausted
    }
}

impl SwapBook {
    pub fn new(
        swaps: Vec<SyntheticSwap>,
        baseline: &LiquidityProfile,
        model: ImpactModel,
        averaging: Averaging,
    ) -> Self {
        let liquidity: Vec<BigUint> = swaps.iter().map(|s| baseline.active_liquidity_at(s.tick)).collect();
        let eval = |(s, l): (&SyntheticSwap, &BigUint)| price_impact(s, l, model).ok();
        #[cfg(feature = "parallel")]
        let impacts = {
            use rayon::prelude::*;
            swaps.par_iter().zip(liquidity.par_iter()).map(eval).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let impacts = swaps.iter().zip(liquidity.iter()).map(eval).collect();
        SwapBook {
            swaps,
            liquidity,
            impacts,
            model,
            averaging,
        }
    }

    pub fn swaps(&self) -> &[SyntheticSwap] {
        &self.swaps
    }

    pub fn len(&self) -> usize {
        self.swaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.swaps.is_empty()
    }

    pub fn model(&self) -> ImpactModel {
        self.model
    }

    pub fn averaging(&self) -> Averaging {
        self.averaging
    }

    /// Baseline mean over every computable swap.
    pub fn baseline(&self) -> Result<ImpactSummary> {
        if self.swaps.is_empty() {
            return Err(Error::InvalidArgument("swap set is empty".into()));
        }
        let mut sum = BigDecimal::zero();
        let mut evaluated = 0;
        for pi in self.impacts.iter().flatten() {
            sum += pi.value(self.averaging);
            evaluated += 1;
        }
        if evaluated == 0 {
            return Err(Error::NoMeasurableImpact(self.swaps.len()));
        }
        Ok(ImpactSummary {
            mean: mean(&sum, evaluated),
            evaluated,
            skipped: self.swaps.len() - evaluated,
        })
    }

    /// Pairwise comparison against `alternative`. Swaps whose liquidity is
    /// unchanged reuse the baseline impact. Returns `None` for the means when
    /// the common set is empty.
    pub fn compare(&self, alternative: &LiquidityProfile) -> (Option<PairedSummary>, usize, usize) {
        enum Slot {
            BaselineSkip,
            Exhausted,
            Pair(usize, Option<PriceImpact>),
        }
        let slot = |i: usize| -> Slot {
            let Some(base) = &self.impacts[i] else {
                return Slot::BaselineSkip;
            };
            let swap = &self.swaps[i];
            let l = alternative.active_liquidity_at(swap.tick);
            if l == self.liquidity[i] {
                let _ = base;
                return Slot::Pair(i, None);
            }
            match price_impact(swap, &l, self.model) {
                Ok(pi) => Slot::Pair(i, Some(pi)),
                Err(_) => Slot::Exhausted,
            }
        };
        #[cfg(feature = "parallel")]
        let slots: Vec<Slot> = {
            use rayon::prelude::*;
            (0..self.swaps.len()).into_par_iter().map(slot).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let slots: Vec<Slot> = (0..self.swaps.len()).map(slot).collect();

        let mut base_sum = BigDecimal::zero();
        let mut alt_sum = BigDecimal::zero();
        let (mut evaluated, mut baseline_skipped, mut exhausted) = (0usize, 0usize, 0usize);
        for s in slots {
            match s {
                Slot::BaselineSkip => baseline_skipped += 1,
                Slot::Exhausted => exhausted += 1,
                Slot::Pair(i, alt) => {
                    let base = self.impacts[i].as_ref().expect("baseline computable");
                    base_sum += base.value(self.averaging);
                    match &alt {
                        Some(pi) => alt_sum += pi.value(self.averaging),
                        None => alt_sum += base.value(self.averaging),
                    }
                    evaluated += 1;
                }
            }
        }
        if evaluated == 0 {
            return (None, baseline_skipped, exhausted);
        }
        (
            Some(PairedSummary {
                pi_baseline: mean(&base_sum, evaluated),
                pi_alternative: mean(&alt_sum, evaluated),
                evaluated,
                baseline_skipped,
                exhausted,
            }),
            baseline_skipped,
            exhausted,
        )
    }
}

/// `tick, amount0, amount1, liquidity, sqrtPriceX96, seed` per line.
pub fn swaps_to_jsonl(swaps: &[SyntheticSwap], seed: u64) -> String {
    let mut out = String::new();
    for s in swaps {
        let mut m = Map::new();
        m.insert("tick".into(), Value::from(s.tick));
        m.insert("amount0".into(), Value::from(s.amount0_in.to_string()));
        m.insert("amount1".into(), Value::from(s.amount1_in.to_string()));
        m.insert("liquidity".into(), Value::from(s.liquidity.to_string()));
        m.insert("sqrtPriceX96".into(), Value::from(s.sqrt_price_x96.to_string()));
        m.insert("seed".into(), Value::from(seed));
        out.push_str(&Value::Object(m).to_string());
        out.push('\n');
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SwapRecord {
    tick: i32,
    amount0: String,
    amount1: String,
    liquidity: String,
    #[serde(rename = "sqrtPriceX96")]
    sqrt_price_x96: String,
    seed: u64,
}

/// Reads a swap set written by [`swaps_to_jsonl`]; returns the swaps and the
/// seed recorded on the first line.
pub fn swaps_from_jsonl<R: BufRead>(reader: R) -> Result<(Vec<SyntheticSwap>, Option<u64>)> {
    let mut swaps = Vec::new();
    let mut seed = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("swap line {}", idx + 1), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| Error::Schema {
            line: idx + 1,
            message,
        };
        let rec: SwapRecord = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        seed.get_or_insert(rec.seed);
        check_tick(rec.tick as i64)?;
        let raw = BigUint::from_str(&rec.sqrt_price_x96).map_err(|e| schema(e.to_string()))?;
        let swap = SyntheticSwap {
            tick: rec.tick,
            amount0_in: decimal::parse(&rec.amount0)?,
            amount1_in: decimal::parse(&rec.amount1)?,
            liquidity: BigUint::from_str(&rec.liquidity).map_err(|e| schema(e.to_string()))?,
            sqrt_price_x96: SqrtPriceX96::new(raw)?,
        };
        if is_negative(&swap.amount0_in) || is_negative(&swap.amount1_in) {
            return Err(schema("negative swap amount".into()));
        }
        swaps.push(swap);
    }
    Ok((swaps, seed))
}
