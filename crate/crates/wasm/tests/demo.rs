use lsis_wasm::{analyze_synthetic_json, impact_curve_json, sweep_two_owner_json};

#[test]
fn impact_curve_is_monotone_and_negative() {
    let doc = impact_curve_json("1000000000000000000", "1", true, 0.5, 20).unwrap();
    let pts: Vec<serde_json::Value> = serde_json::from_str(&doc).unwrap();
    assert_eq!(pts.len(), 20);
    let vals: Vec<f64> = pts.iter().map(|p| p["impact_percent"].as_str().unwrap().parse().unwrap()).collect();
    assert!(vals.iter().all(|v| *v < 0.0));
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    // Half the token0 capacity doubles the root price in this model.
    assert!((vals[19] + 300.0).abs() < 1e-9, "{}", vals[19]);

    let doc = impact_curve_json("1000000000000000000", "1", false, 0.5, 20).unwrap();
    let pts: Vec<serde_json::Value> = serde_json::from_str(&doc).unwrap();
    let last: f64 = pts[19]["impact_percent"].as_str().unwrap().parse().unwrap();
    assert!((last + 75.0).abs() < 1e-9, "{last}");
}

#[test]
fn impact_curve_rejects_bad_input() {
    assert!(impact_curve_json("0", "1", true, 0.5, 20).is_err());
    assert!(impact_curve_json("10", "x", true, 0.5, 20).is_err());
    assert!(impact_curve_json("10", "1", true, 1.0, 20).is_err());
    assert!(impact_curve_json("10", "1", true, 0.5, 1).is_err());
}

#[test]
fn synthetic_analysis_reports_k_rows() {
    let doc = analyze_synthetic_json(200, 12, 3, 5).unwrap();
    let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 5);
    assert_eq!(doc, analyze_synthetic_json(200, 12, 3, 5).unwrap());
    assert!(analyze_synthetic_json(5, 12, 3, 5).is_err());
}

#[test]
fn sweep_flips_leader() {
    let doc = sweep_two_owner_json(0.2, "-0.5", "-5.0", "0.5").unwrap();
    let pts: Vec<serde_json::Value> = serde_json::from_str(&doc).unwrap();
    assert_eq!(pts.len(), 10);
    assert_eq!(pts[0]["leader"], "historic");
    assert_eq!(pts[9]["leader"], "recent");
    assert!(sweep_two_owner_json(0.2, "-0.5", "-5.0", "0").is_err());
}
