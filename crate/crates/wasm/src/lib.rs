//! wasm-bindgen entry points for the static demo in `www/`. Each export takes
//! plain numbers or strings and returns a JSON document; the `*_json`
//! functions hold the logic so native tests can call them directly.

use bigdecimal::BigDecimal;
use num_bigint::BigUint;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use lsis_core::counterfactual::report::analysis_to_json;
use lsis_core::counterfactual::{run_analysis, AnalysisConfig};
use lsis_core::decimal;
use lsis_core::etwl::{lambda_sweep, EtwlOptions};
use lsis_core::fixtures::{random_dataset, two_owner_sweep, RandomSpec};
use lsis_core::swap_math::{price_impact, ImpactModel, SqrtPriceX96, SyntheticSwap};

type Out = Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_dec(field: &str, s: &str) -> Result<BigDecimal, String> {
    decimal::parse(s.trim()).map_err(|e| format!("{field}: {e}"))
}

#[derive(Serialize)]
struct CurvePoint {
    /// Swap size as a fraction of the amount that would drain the tick.
    fraction: f64,
    impact_percent: String,
}

/// Impact against swap size at one tick. `sqrt_price` is the plain square
/// root of price; sizes run over `(0, max_fraction]` in `points` steps.
pub fn impact_curve_json(liquidity: &str, sqrt_price: &str, token0_in: bool, max_fraction: f64, points: u32) -> Out {
    let l: BigUint = liquidity.trim().parse().map_err(|_| "liquidity must be a positive integer".to_string())?;
    if l == BigUint::default() {
        return Err("liquidity must be a positive integer".into());
    }
    let sqrt = parse_dec("sqrt_price", sqrt_price)?;
    let x96 = SqrtPriceX96::from_sqrt_price(&sqrt).map_err(err)?;
    if !(max_fraction > 0.0 && max_fraction < 1.0) {
        return Err("max_fraction must be in (0, 1)".into());
    }
    if !(2..=500).contains(&points) {
        return Err("points must be between 2 and 500".into());
    }
    let ld = decimal::from_biguint(&l);
    let sqrt = x96.to_sqrt_price();
    let capacity = if token0_in { decimal::div(&ld, &sqrt) } else { decimal::mul(&ld, &sqrt) };
    let mut curve = Vec::with_capacity(points as usize);
    for i in 1..=points {
        let fraction = max_fraction * i as f64 / points as f64;
        let f = parse_dec("fraction", &format!("{fraction:.12}"))?;
        let amount = decimal::mul(&capacity, &f);
        let zero = BigDecimal::from(0);
        let swap = SyntheticSwap {
            tick: 0,
            amount0_in: if token0_in { amount.clone() } else { zero.clone() },
            amount1_in: if token0_in { zero } else { amount },
            liquidity: l.clone(),
            sqrt_price_x96: x96.clone(),
        };
        let pi = price_impact(&swap, &l, ImpactModel::Symmetric).map_err(err)?;
        curve.push(CurvePoint {
            fraction,
            impact_percent: decimal::fmt(&pi.percent),
        });
    }
    serde_json::to_string(&curve).map_err(err)
}

/// Counterfactual scoring on a seeded synthetic pool, with a coarse swap
/// grid so it stays interactive.
pub fn analyze_synthetic_json(events: u32, owners: u32, seed: u64, k: u32) -> Out {
    if !(10..=3000).contains(&events) {
        return Err("events must be between 10 and 3000".into());
    }
    if !(1..=200).contains(&owners) {
        return Err("owners must be between 1 and 200".into());
    }
    let dataset = random_dataset(RandomSpec {
        events: events as usize,
        owners: owners as u64,
        seed,
        tick_span: 600,
        ..Default::default()
    });
    let config = AnalysisConfig {
        k: k.max(1) as usize,
        grid_start: parse_dec("grid", "0.001")?,
        grid_end: parse_dec("grid", "0.009")?,
        grid_step: parse_dec("grid", "0.002")?,
        seed,
        ..Default::default()
    };
    let analysis = run_analysis(&dataset, &config).map_err(err)?;
    Ok(analysis_to_json(&analysis))
}

#[derive(Serialize)]
struct SweepPoint {
    lambda: String,
    spearman: f64,
    leader: String,
}

/// Decay sweep on a two-owner pool: one large early position and one
/// recent position `recent_share` times its size.
pub fn sweep_two_owner_json(recent_share: f64, from: &str, to: &str, step: &str) -> Out {
    if !(recent_share > 0.0 && recent_share <= 1.0) {
        return Err("recent_share must be in (0, 1]".into());
    }
    let (from, to, step) = (parse_dec("from", from)?, parse_dec("to", to)?, parse_dec("step", step)?);
    if !decimal::is_positive(&step) {
        return Err("step must be positive".into());
    }
    let mut lambdas = Vec::new();
    let mut l = from.clone();
    while l >= to && lambdas.len() < 200 {
        lambdas.push(l.clone());
        l = decimal::round(&l - &step);
    }
    if lambdas.len() < 2 {
        return Err("range must hold at least two values".into());
    }
    // The historic owner holds l_b; the recent one holds l_b / 5 in the
    // fixture, so rescale to the requested share.
    let l_b: u128 = 1_000_000_000_000;
    let (base, recent, historic) = two_owner_sweep(l_b);
    let scale = (recent_share * 5.0 * 1e6).round() as u128;
    let events: Vec<_> = base
        .events()
        .iter()
        .cloned()
        .map(|mut e| {
            if e.owner == recent {
                e.liquidity = e.liquidity * scale / 1_000_000;
            }
            e
        })
        .collect();
    let dataset = lsis_core::EventDataset::new(base.pool_address(), events).map_err(err)?;
    let rows = lambda_sweep(&dataset, &lambdas, 2, EtwlOptions::default()).map_err(err)?;
    let points: Vec<SweepPoint> = rows
        .iter()
        .map(|r| SweepPoint {
            lambda: decimal::fmt(&r.lambda),
            spearman: r.spearman,
            leader: if r.ranking.first().map(|e| e.owner) == Some(historic) {
                "historic".into()
            } else {
                "recent".into()
            },
        })
        .collect();
    serde_json::to_string(&points).map_err(err)
}

#[wasm_bindgen]
pub fn impact_curve(liquidity: &str, sqrt_price: &str, token0_in: bool, max_fraction: f64, points: u32) -> Result<String, JsError> {
    impact_curve_json(liquidity, sqrt_price, token0_in, max_fraction, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn analyze_synthetic(events: u32, owners: u32, seed: u64, k: u32) -> Result<String, JsError> {
    analyze_synthetic_json(events, owners, seed, k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sweep_two_owner(recent_share: f64, from: &str, to: &str, step: &str) -> Result<String, JsError> {
    sweep_two_owner_json(recent_share, from, to, step).map_err(|e| JsError::new(&e))
}
