//! Pre-trade check for a proposed burn.
//!
//! A request removes its liquidity from the loaded baseline profile on
//! `[tick_lower, tick_upper)`. The projected degradation is the relative
//! change in mean impact over the fixed swap set. If the reduced profile can
//! no longer absorb a swap the baseline could, degradation is unbounded.

use std::collections::BTreeMap;

use bigdecimal::BigDecimal;
use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Deserializer, Serialize};

use crate::counterfactual::LsisValue;
use crate::decimal;
use crate::error::{Error, Result};
use crate::liquidity::LiquidityProfile;
use crate::swap_math::{generate_synthetic_swaps, Averaging, ImpactModel, SwapBook, SwapGrid};
use crate::types::{check_tick, Address, EventDataset};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateThresholds {
    /// Degradation at or below this is allowed.
    pub allow: BigDecimal,
    /// Degradation above `allow` and at or below this is suspended for review.
    pub deny: BigDecimal,
    /// Required post-burn depth for an Allow.
    #[serde(with = "biguint_string", default)]
    pub min_depth: BigUint,
    /// Half-width of the depth window, in ticks.
    pub depth_window: i32,
}

impl Default for GateThresholds {
    fn default() -> Self {
        GateThresholds {
            allow: BigDecimal::new(5.into(), 3),
            deny: BigDecimal::new(5.into(), 2),
            min_depth: BigUint::default(),
            depth_window: 100,
        }
    }
}

impl GateThresholds {
    pub fn validate(&self) -> Result<()> {
        if decimal::is_negative(&self.allow) || self.allow > self.deny {
            return Err(Error::InvalidArgument(format!(
                "gate thresholds must satisfy 0 <= allow <= deny (got {}, {})",
                self.allow, self.deny
            )));
        }
        if self.depth_window < 0 {
            return Err(Error::InvalidArgument("depth window must be non-negative".into()));
        }
        Ok(())
    }
}

mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Flex {
            N(u64),
            S(String),
        }
        match Flex::deserialize(d)? {
            Flex::N(n) => Ok(BigUint::from(n)),
            Flex::S(s) => s.trim().parse().map_err(serde::de::Error::custom),
        }
    }
}

fn flex_u128<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u128, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flex {
        N(u128),
        S(String),
    }
    match Flex::deserialize(d)? {
        Flex::N(n) => Ok(n),
        Flex::S(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

fn flex_i32<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<i32, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flex {
        N(i32),
        S(String),
    }
    match Flex::deserialize(d)? {
        Flex::N(n) => Ok(n),
        Flex::S(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurnRequest {
    pub owner: Address,
    #[serde(deserialize_with = "flex_i32")]
    pub tick_lower: i32,
    #[serde(deserialize_with = "flex_i32")]
    pub tick_upper: i32,
    #[serde(deserialize_with = "flex_u128", serialize_with = "ser_string")]
    pub liquidity: u128,
    #[serde(default)]
    pub request_id: String,
    /// Reserved; accepted and ignored.
    #[serde(default)]
    pub volatility: Option<f64>,
}

fn ser_string<S: serde::Serializer>(v: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Allow,
    Deny,
    Suspend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateDecision {
    pub request_id: String,
    pub verdict: Verdict,
    /// Decimal string, `"inf"` when unbounded, absent when not computed.
    pub projected_degradation: Option<String>,
    pub depth_before: String,
    pub depth_after: String,
    pub reason: String,
}

/// Immutable snapshot the gate evaluates against.
#[derive(Debug, Clone)]
pub struct GateState {
    dataset_hash: String,
    baseline: LiquidityProfile,
    owners: BTreeMap<Address, LiquidityProfile>,
    book: SwapBook,
    baseline_pi: Option<BigDecimal>,
    reference_tick: i32,
}

impl GateState {
    pub fn new(dataset: &EventDataset, grid: &SwapGrid, seed: u64, model: ImpactModel) -> Result<Self> {
        let baseline = LiquidityProfile::build(dataset, None);
        let swaps = generate_synthetic_swaps(&baseline, grid, seed);
        if swaps.is_empty() {
            return Err(Error::EmptyProfile);
        }
        let book = SwapBook::new(swaps, &baseline, model, Averaging::Magnitude);
        let baseline_pi = book.baseline().ok().map(|s| s.mean);
        let mut per_owner: BTreeMap<Address, Vec<&crate::types::PoolEvent>> = BTreeMap::new();
        for e in dataset.events() {
            per_owner.entry(e.owner).or_default().push(e);
        }
        let owners = per_owner
            .into_iter()
            .map(|(a, evs)| (a, LiquidityProfile::from_events(evs, None)))
            .collect();
        let reference_tick = deepest_tick(&baseline);
        Ok(GateState {
            dataset_hash: dataset.content_hash(),
            baseline,
            owners,
            book,
            baseline_pi,
            reference_tick,
        })
    }

    pub fn dataset_hash(&self) -> &str {
        &self.dataset_hash
    }

    pub fn baseline_pi(&self) -> Option<&BigDecimal> {
        self.baseline_pi.as_ref()
    }

    pub fn swap_count(&self) -> usize {
        self.book.len()
    }

    pub fn reference_tick(&self) -> i32 {
        self.reference_tick
    }

    pub fn baseline(&self) -> &LiquidityProfile {
        &self.baseline
    }

    fn depth(&self, profile: &LiquidityProfile, window: i32) -> BigUint {
        let lo = self.reference_tick.saturating_sub(window);
        let hi = self.reference_tick.saturating_add(window);
        profile.min_active_over(lo, hi)
    }

    /// Pure evaluation; never mutates the snapshot.
    pub fn evaluate(&self, req: &BurnRequest, t: &GateThresholds) -> GateDecision {
        let depth_before = self.depth(&self.baseline, t.depth_window);
        let decision = |verdict, degradation: Option<String>, after: &BigUint, reason: &str| GateDecision {
            request_id: req.request_id.clone(),
            verdict,
            projected_degradation: degradation,
            depth_before: depth_before.to_string(),
            depth_after: after.to_string(),
            reason: reason.to_string(),
        };

        if let Err(e) = check_request(req) {
            return decision(Verdict::Deny, None, &depth_before, &format!("invalid request: {e}"));
        }
        let held = self
            .owners
            .get(&req.owner)
            .map(|p| p.min_active_over(req.tick_lower, req.tick_upper - 1))
            .unwrap_or_default();
        if held < BigUint::from(req.liquidity) {
            return decision(Verdict::Deny, None, &depth_before, "insufficient position");
        }
        if self.baseline_pi.is_none() {
            return decision(Verdict::Suspend, None, &depth_before, "oracle degraded");
        }

        let hypothetical =
            self.baseline
                .with_range_removed(req.tick_lower, req.tick_upper, &BigInt::from(req.liquidity));
        let depth_after = self.depth(&hypothetical, t.depth_window);
        let (paired, _, exhausted) = self.book.compare(&hypothetical);
        let degradation = match paired {
            Some(p) if exhausted == 0 => LsisValue::relative(&p.pi_baseline, &p.pi_alternative),
            _ => LsisValue::Unbounded,
        };
        let shown = Some(degradation.to_string());
        let value = match &degradation {
            LsisValue::Unbounded => {
                return decision(Verdict::Deny, shown, &depth_after, "swap capacity exhausted");
            }
            LsisValue::Finite(v) => v,
        };
        if *value <= t.allow {
            if depth_after >= t.min_depth {
                decision(Verdict::Allow, shown, &depth_after, "within tolerance")
            } else {
                decision(Verdict::Deny, shown, &depth_after, "insufficient depth")
            }
        } else if *value <= t.deny {
            decision(Verdict::Suspend, shown, &depth_after, "degradation within review band")
        } else {
            decision(Verdict::Deny, shown, &depth_after, "degradation above deny threshold")
        }
    }
}

fn check_request(req: &BurnRequest) -> Result<()> {
    check_tick(req.tick_lower as i64)?;
    check_tick(req.tick_upper as i64)?;
    if req.tick_lower >= req.tick_upper {
        return Err(Error::InvalidArgument("tick_lower must be below tick_upper".into()));
    }
    if req.liquidity == 0 {
        return Err(Error::InvalidArgument("liquidity must be positive".into()));
    }
    Ok(())
}

/// First initialized tick holding the greatest active liquidity.
fn deepest_tick(profile: &LiquidityProfile) -> i32 {
    let mut best: Option<(i32, &BigInt)> = None;
    for (t, c) in profile.ticks().iter().zip(profile.cumulative()) {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((*t, c));
        }
    }
    best.map(|(t, _)| t).unwrap_or(0)
}
