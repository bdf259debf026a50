use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use lsis_core::counterfactual::AnalysisConfig;
use lsis_core::etwl::EtwlOptions;
use lsis_core::fixtures::{linchpin, sole_lp};
use lsis_core::gatekeeper::GateThresholds;
use lsis_gatekeeper::{router, AppState, GatekeeperError, Snapshot};

fn config() -> AnalysisConfig {
    AnalysisConfig {
        k: 10,
        grid_start: "0.001".parse().unwrap(),
        grid_end: "0.01".parse().unwrap(),
        grid_step: "0.003".parse().unwrap(),
        // The whale never burns; close open positions so it gets a score.
        etwl: EtwlOptions { close_at_max_block: true },
        ..Default::default()
    }
}

fn app() -> Arc<AppState> {
    let loader = || Snapshot::build(&linchpin().dataset, &config(), true);
    AppState::new(Box::new(loader), GateThresholds::default()).unwrap()
}

async fn call(state: &Arc<AppState>, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn burn(liquidity: u128) -> String {
    let fx = linchpin();
    json!({
        "owner": fx.whale.to_string(),
        "tick_lower": fx.tick_lower.to_string(),
        "tick_upper": fx.tick_upper.to_string(),
        "liquidity": liquidity.to_string(),
        "request_id": format!("req-{liquidity}"),
    })
    .to_string()
}

#[tokio::test]
async fn evaluate_and_health() {
    let st = app();
    let whale = linchpin().whale_liquidity;
    let (s, full) = call(&st, Method::POST, "/v1/evaluate-burn", Some(burn(whale))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(full["verdict"], "Deny");
    let (_, dust) = call(&st, Method::POST, "/v1/evaluate-burn", Some(burn(whale / 10_000))).await;
    assert_eq!(dust["verdict"], "Allow", "{dust}");
    assert_eq!(dust["request_id"], format!("req-{}", whale / 10_000));

    let (s, h) = call(&st, Method::GET, "/v1/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(h["dataset_hash"], linchpin().dataset.content_hash());
    assert!(h["baseline_pi"].is_string());
    assert!(h["swap_count"].as_u64().unwrap() > 0);
}

#[tokio::test]
async fn malformed_and_invalid_bodies() {
    let st = app();
    let (s, e) = call(&st, Method::POST, "/v1/evaluate-burn", Some("{not json".into())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "malformed_json");
    assert!(e["message"].is_string());
    let (s, e) = call(&st, Method::POST, "/v1/evaluate-burn", Some(r#"{"owner":"0x1"}"#.into())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "schema_violation");
    let (s, e) = call(&st, Method::GET, "/v1/rankings?limit=abc", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "invalid_query");
    let (s, _) = call(&st, Method::GET, "/v2/nothing", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn rankings_respect_limit() {
    let st = app();
    let (s, all) = call(&st, Method::GET, "/v1/rankings", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(all["count"], 10);
    let (_, two) = call(&st, Method::GET, "/v1/rankings?limit=2", None).await;
    let rows = two["reports"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["owner"], linchpin().whale.to_string());
}

#[tokio::test]
async fn thresholds_hot_swap() {
    let st = app();
    let whale = linchpin().whale_liquidity;
    // A burn of a tenth of the whale lands above the default allow band.
    let (_, before) = call(&st, Method::POST, "/v1/evaluate-burn", Some(burn(whale / 10))).await;
    assert_ne!(before["verdict"], "Allow", "{before}");

    let loose = json!({"allow": "1000", "deny": "1000", "min_depth": "0", "depth_window": 100}).to_string();
    let (s, _) = call(&st, Method::PUT, "/v1/thresholds", Some(loose)).await;
    assert_eq!(s, StatusCode::OK);
    let (_, after) = call(&st, Method::POST, "/v1/evaluate-burn", Some(burn(whale / 10))).await;
    assert_eq!(after["verdict"], "Allow", "{after}");

    let bad = json!({"allow": "0.5", "deny": "0.1", "depth_window": 100}).to_string();
    let (s, e) = call(&st, Method::PUT, "/v1/thresholds", Some(bad)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "invalid_thresholds");
    let (_, cur) = call(&st, Method::GET, "/v1/thresholds", None).await;
    assert_eq!(cur["allow"], "1000");
}

#[tokio::test]
async fn reload_swaps_snapshot_and_survives_failure() {
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = calls.clone();
    let loader = move || match counter.fetch_add(1, Ordering::SeqCst) {
        0 => Snapshot::build(&linchpin().dataset, &config(), false),
        1 => Snapshot::build(&sole_lp().0, &config(), false),
        _ => Err(GatekeeperError::Core(lsis_core::Error::EmptyDataset)),
    };
    let st = AppState::new(Box::new(loader), GateThresholds::default()).unwrap();
    let held = st.snapshot();
    let (_, h0) = call(&st, Method::GET, "/v1/health", None).await;
    let (s, h1) = call(&st, Method::POST, "/v1/reload", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_ne!(h0["dataset_hash"], h1["dataset_hash"]);
    assert_eq!(h1["dataset_hash"], sole_lp().0.content_hash());
    // An Arc taken before the reload still sees the old data.
    assert_eq!(held.gate.dataset_hash(), linchpin().dataset.content_hash());

    let (s, e) = call(&st, Method::POST, "/v1/reload", None).await;
    assert_eq!(s, StatusCode::INTERNAL_SERVER_ERROR);
    assert_eq!(e["code"], "reload_failed");
    let (_, h2) = call(&st, Method::GET, "/v1/health", None).await;
    assert_eq!(h2["dataset_hash"], h1["dataset_hash"]);
}

#[tokio::test]
async fn evaluations_leave_hash_unchanged() {
    let st = app();
    let (_, before) = call(&st, Method::GET, "/v1/health", None).await;
    let whale = linchpin().whale_liquidity;
    for i in 1..=50u128 {
        let (s, _) = call(&st, Method::POST, "/v1/evaluate-burn", Some(burn(whale / 50 * i))).await;
        assert_eq!(s, StatusCode::OK);
    }
    let (_, after) = call(&st, Method::GET, "/v1/health", None).await;
    assert_eq!(before, after);
}
