use std::sync::OnceLock;

use bigdecimal::BigDecimal;
use proptest::prelude::*;

use lsis_core::counterfactual::LsisValue;
use lsis_core::fixtures::{linchpin, Linchpin};
use lsis_core::gatekeeper::{BurnRequest, GateState, GateThresholds, Verdict};
use lsis_core::swap_math::{ImpactModel, SwapGrid};

fn fixture() -> &'static (GateState, Linchpin) {
    static CELL: OnceLock<(GateState, Linchpin)> = OnceLock::new();
    CELL.get_or_init(|| {
        let fx = linchpin();
        let grid = SwapGrid::parse("0.001,0.01,0.003").unwrap();
        let st = GateState::new(&fx.dataset, &grid, 42, ImpactModel::Symmetric).unwrap();
        (st, fx)
    })
}

fn severity(v: Verdict) -> u8 {
    match v {
        Verdict::Allow => 0,
        Verdict::Suspend => 1,
        Verdict::Deny => 2,
    }
}

fn whale_burn(fx: &Linchpin, per_million: u128, lo: i32, hi: i32) -> BurnRequest {
    BurnRequest {
        owner: fx.whale,
        tick_lower: lo,
        tick_upper: hi,
        liquidity: (fx.whale_liquidity / 1_000_000 * per_million).max(1),
        request_id: format!("burn-{per_million}"),
        volatility: None,
    }
}

fn range() -> impl Strategy<Value = (i32, i32)> {
    (0i32..20, 1i32..20).prop_map(|(a, w)| {
        let lo = -600 + 60 * a;
        (lo, (lo + 60 * w).min(600).max(lo + 60))
    })
}

fn thresholds() -> impl Strategy<Value = GateThresholds> {
    (0i64..2_000, 0i64..50_000).prop_map(|(a, extra)| GateThresholds {
        allow: BigDecimal::new(a.into(), 4),
        deny: BigDecimal::new((a + extra).into(), 4),
        ..Default::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A larger burn of the same range is never judged less severe.
    #[test]
    fn severity_is_monotone_in_size(a in 1u128..1_000_000, b in 1u128..1_000_000, (lo, hi) in range(), t in thresholds()) {
        let (st, fx) = fixture();
        let (small, large) = (a.min(b), a.max(b));
        let ds = st.evaluate(&whale_burn(fx, small, lo, hi), &t);
        let dl = st.evaluate(&whale_burn(fx, large, lo, hi), &t);
        prop_assert!(severity(ds.verdict) <= severity(dl.verdict), "{ds:?} vs {dl:?}");
        let deg = |d: &lsis_core::gatekeeper::GateDecision| LsisValue::parse(d.projected_degradation.as_deref().unwrap()).unwrap();
        prop_assert!(deg(&ds) <= deg(&dl));
    }

    /// Tightening thresholds never relaxes a verdict.
    #[test]
    fn severity_is_monotone_in_thresholds(p in 1u128..1_000_000, (lo, hi) in range(), t in thresholds(), shrink in 1i64..10) {
        let (st, fx) = fixture();
        let req = whale_burn(fx, p, lo, hi);
        let tight = GateThresholds {
            allow: &t.allow / BigDecimal::from(shrink),
            deny: &t.deny / BigDecimal::from(shrink),
            ..t.clone()
        };
        let loose = st.evaluate(&req, &t);
        let strict = st.evaluate(&req, &tight);
        prop_assert!(severity(loose.verdict) <= severity(strict.verdict));
    }

    #[test]
    fn evaluation_is_idempotent_and_read_only(p in 1u128..1_000_000, (lo, hi) in range(), t in thresholds()) {
        let (st, fx) = fixture();
        let hash = st.dataset_hash().to_string();
        let pi = st.baseline_pi().cloned();
        let cum = st.baseline().cumulative().to_vec();
        let req = whale_burn(fx, p, lo, hi);
        let first = st.evaluate(&req, &t);
        let second = st.evaluate(&req, &t);
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(st.dataset_hash(), hash.as_str());
        prop_assert_eq!(st.baseline_pi().cloned(), pi);
        prop_assert_eq!(st.baseline().cumulative(), cum.as_slice());
        prop_assert_eq!(fx.dataset.content_hash(), hash);
    }
}

#[test]
fn full_whale_exit_is_denied() {
    let (st, fx) = fixture();
    let d = st.evaluate(&whale_burn(fx, 1_000_000, fx.tick_lower, fx.tick_upper), &GateThresholds::default());
    assert_eq!(d.verdict, Verdict::Deny);
}
