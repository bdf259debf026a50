mod common;

use bigdecimal::BigDecimal;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use common::{etwl_oracle, exp_oracle, rat_from_decimal, sig_digits_match};
use lsis_core::decimal;
use lsis_core::etwl::{compute_etwl, raw_liquidity_time, rank_all, rank_lps, EtwlOptions};
use lsis_core::fixtures::{random_dataset, two_owner_sweep, EventBuilder, RandomSpec};
use lsis_core::{Address, EventDataset};

fn lambda() -> impl Strategy<Value = BigDecimal> {
    (-500i64..0).prop_map(|n| BigDecimal::new(n.into(), 2))
}

fn dataset() -> impl Strategy<Value = EventDataset> {
    (any::<u64>(), 2usize..80, 1u64..10).prop_map(|(seed, events, owners)| {
        random_dataset(RandomSpec {
            events,
            owners,
            seed,
            tick_spacing: 10,
            tick_span: 200,
            burn_per_mille: 400,
        })
    })
}

fn scaled(d: &EventDataset, c: u128) -> EventDataset {
    let events = d
        .events()
        .iter()
        .cloned()
        .map(|mut e| {
            e.liquidity *= c;
            e
        })
        .collect();
    EventDataset::new(d.pool_address(), events).unwrap()
}

#[test]
fn worked_example_to_thirty_digits() {
    let owner = Address::from_index(1);
    let mut b = EventBuilder::new();
    b.mint(owner, -10, 10, 100, 0)
        .burn(owner, -10, 10, 100, 10)
        .mint(Address::from_index(2), -10, 10, 1, 100);
    let d = b.build();
    let score = &compute_etwl(&d, &"-1.5".parse().unwrap())[&owner];
    let want = BigRational::from_integer(1000.into()) * exp_oracle(&BigRational::new((-3).into(), 2.into()), 60);
    assert!(sig_digits_match(score, &want, 30), "{score}");
    assert!(sig_digits_match(score, &want, 45));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_rational_oracle(d in dataset(), lam in lambda()) {
        let got = compute_etwl(&d, &lam);
        let want = etwl_oracle(&d, &rat_from_decimal(&lam), 60);
        for (owner, w) in want {
            let g = &got[&owner];
            prop_assert!(sig_digits_match(g, &w, 40), "{owner}: {g} vs {w}");
        }
    }

    #[test]
    fn scale_equivariance(d in dataset(), lam in lambda(), c in 2u128..1000) {
        let base = compute_etwl(&d, &lam);
        let big = compute_etwl(&scaled(&d, c), &lam);
        for (owner, s) in &base {
            prop_assert_eq!(&big[owner], &(s * BigDecimal::from(c as u64)));
        }
        let order = |m| rank_all(m).into_iter().map(|e| e.owner).collect::<Vec<_>>();
        prop_assert_eq!(order(&base), order(&big));
    }

    #[test]
    fn bounded_by_raw_liquidity_time(d in dataset(), lam in lambda()) {
        let scores = compute_etwl(&d, &lam);
        let raw = raw_liquidity_time(&d, EtwlOptions::default());
        let floor = decimal::exp(&lam);
        for (owner, s) in &scores {
            let r = BigDecimal::from(raw[owner].clone());
            prop_assert!(*s >= BigDecimal::zero());
            prop_assert!(*s <= r);
            // Weights never drop below e^λ.
            prop_assert!(*s >= decimal::mul(&r, &floor) - BigDecimal::new(1.into(), 30));
        }
    }

    #[test]
    fn deterministic(d in dataset(), lam in lambda(), k in 1usize..20) {
        let a = rank_lps(&compute_etwl(&d, &lam), k).unwrap();
        let b = rank_lps(&compute_etwl(&d, &lam), k).unwrap();
        prop_assert_eq!(&a, &b);
        for (i, e) in a.iter().enumerate() {
            prop_assert_eq!(e.rank, i + 1);
        }
    }
}

#[test]
fn top_k_equals_full_sort() {
    let d = random_dataset(RandomSpec {
        events: 3000,
        owners: 150,
        seed: 3,
        ..Default::default()
    });
    let scores = compute_etwl(&d, &"-1.5".parse().unwrap());
    assert_eq!(scores.len(), 150);
    let top = rank_lps(&scores, 100).unwrap();
    let mut oracle: Vec<(Address, BigDecimal)> = scores.into_iter().collect();
    oracle.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let want: Vec<Address> = oracle.into_iter().take(100).map(|(a, _)| a).collect();
    assert_eq!(top.iter().map(|e| e.owner).collect::<Vec<_>>(), want);
}

/// The two-owner fixture flips order where `20·e^(0.1λ) = 100·e^λ`.
#[test]
fn crossover_found_by_bisection() {
    let (d, recent, historic) = two_owner_sweep(1_000_000);
    let recent_leads = |lam: f64| {
        let l: BigDecimal = format!("{lam:.12}").parse().unwrap();
        let s = compute_etwl(&d, &l);
        s[&recent] > s[&historic]
    };
    assert!(!recent_leads(-0.5));
    assert!(recent_leads(-5.0));
    let (mut hi, mut lo) = (-0.5f64, -5.0f64);
    for _ in 0..50 {
        let mid = (hi + lo) / 2.0;
        if recent_leads(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let expected = -(5f64.ln()) / 0.9;
    assert!((lo - expected).abs() < 1e-9, "{lo} vs {expected}");
}
