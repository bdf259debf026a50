//! HTTP front end for the burn gate.
//!
//! Routes:
//! - `POST /v1/evaluate-burn`: burn request in, decision out
//! - `GET  /v1/health`: dataset hash, baseline impact, swap count
//! - `GET  /v1/rankings?limit=N`: latest per-owner reports
//! - `GET|PUT /v1/thresholds`: read or hot-swap gate thresholds
//! - `POST /v1/reload`: rebuild the snapshot from its loader
//!
//! Evaluations run on the blocking pool against an `Arc` of the snapshot
//! taken at request start, so a reload never disturbs work in flight.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lsis_core::counterfactual::report::{report_json, reports_from_csv};
use lsis_core::counterfactual::{run_analysis, AnalysisConfig, LsisReport};
use lsis_core::gatekeeper::{BurnRequest, GateDecision, GateState, GateThresholds};
use lsis_core::ingest::{ingest_jsonl, IngestOptions};
use lsis_core::{Address, EventDataset};

#[derive(Debug, thiserror::Error)]
pub enum GatekeeperError {
    #[error(transparent)]
    Core(#[from] lsis_core::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, GatekeeperError>;

/// Everything a request is evaluated against. Immutable once built.
#[derive(Debug)]
pub struct Snapshot {
    pub gate: GateState,
    pub rankings: Vec<LsisReport>,
}

impl Snapshot {
    /// Builds the gate and, if `with_rankings`, runs the full analysis for
    /// the rankings endpoint.
    pub fn build(dataset: &EventDataset, config: &AnalysisConfig, with_rankings: bool) -> Result<Self> {
        config.validate()?;
        let gate = GateState::new(dataset, &config.grid()?, config.seed, config.model)?;
        let rankings = if with_rankings {
            run_analysis(dataset, config)?.reports
        } else {
            Vec::new()
        };
        Ok(Snapshot { gate, rankings })
    }
}

pub trait SnapshotLoader: Send + Sync {
    fn load(&self) -> Result<Snapshot>;
}

impl<F> SnapshotLoader for F
where
    F: Fn() -> Result<Snapshot> + Send + Sync,
{
    fn load(&self) -> Result<Snapshot> {
        self()
    }
}

/// Reads an event JSONL file and, optionally, a precomputed report CSV.
/// Without a CSV the analysis runs at load time.
#[derive(Debug, Clone)]
pub struct FileLoader {
    pub events: PathBuf,
    pub pool: Address,
    pub reports: Option<PathBuf>,
    pub analysis: AnalysisConfig,
    pub strict: bool,
}

impl SnapshotLoader for FileLoader {
    fn load(&self) -> Result<Snapshot> {
        let ingest = ingest_jsonl(&self.events, self.pool, IngestOptions { strict: self.strict })?;
        match &self.reports {
            Some(path) => {
                let mut snap = Snapshot::build(&ingest.dataset, &self.analysis, false)?;
                let file = std::fs::File::open(path).map_err(|source| GatekeeperError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                snap.rankings = reports_from_csv(file)?;
                Ok(snap)
            }
            None => Snapshot::build(&ingest.dataset, &self.analysis, true),
        }
    }
}

pub struct AppState {
    snapshot: RwLock<Arc<Snapshot>>,
    thresholds: RwLock<GateThresholds>,
    loader: Box<dyn SnapshotLoader>,
}

impl AppState {
    pub fn new(loader: Box<dyn SnapshotLoader>, thresholds: GateThresholds) -> Result<Arc<Self>> {
        thresholds.validate()?;
        let snap = loader.load()?;
        Ok(Arc::new(AppState {
            snapshot: RwLock::new(Arc::new(snap)),
            thresholds: RwLock::new(thresholds),
            loader,
        }))
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    pub fn thresholds(&self) -> GateThresholds {
        self.thresholds.read().expect("threshold lock").clone()
    }

    pub fn evaluate(&self, req: &BurnRequest) -> GateDecision {
        let snap = self.snapshot();
        snap.gate.evaluate(req, &self.thresholds())
    }

    /// Rebuilds from the loader; on failure the old snapshot stays.
    pub fn reload(&self) -> Result<()> {
        let fresh = Arc::new(self.loader.load()?);
        *self.snapshot.write().expect("snapshot lock") = fresh;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct ApiError {
    code: &'static str,
    message: String,
}

fn error(status: StatusCode, code: &'static str, message: impl Into<String>) -> Response {
    (status, Json(ApiError { code, message: message.into() })).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/evaluate-burn", post(evaluate_burn))
        .route("/v1/health", get(health))
        .route("/v1/rankings", get(rankings))
        .route("/v1/thresholds", get(get_thresholds).put(put_thresholds))
        .route("/v1/reload", post(reload))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(state)
}

/// Parses a JSON body; syntax errors and schema errors both map to 400
/// with distinct codes.
fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> std::result::Result<T, Response> {
    let value: Value = serde_json::from_slice(body)
        .map_err(|e| error(StatusCode::BAD_REQUEST, "malformed_json", e.to_string()))?;
    serde_json::from_value(value).map_err(|e| error(StatusCode::BAD_REQUEST, "schema_violation", e.to_string()))
}

async fn evaluate_burn(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: BurnRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let snap = state.snapshot();
    let thresholds = state.thresholds();
    match tokio::task::spawn_blocking(move || snap.gate.evaluate(&req, &thresholds)).await {
        Ok(decision) => Json(decision).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
    }
}

fn health_body(snap: &Snapshot) -> Value {
    json!({
        "dataset_hash": snap.gate.dataset_hash(),
        "baseline_pi": snap.gate.baseline_pi().map(|p| p.to_string()),
        "swap_count": snap.gate.swap_count(),
        "reference_tick": snap.gate.reference_tick(),
    })
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    Json(health_body(&state.snapshot())).into_response()
}

#[derive(Debug, Deserialize)]
struct RankingQuery {
    limit: Option<String>,
}

async fn rankings(State(state): State<Arc<AppState>>, Query(q): Query<RankingQuery>) -> Response {
    let snap = state.snapshot();
    let limit = match q.limit.as_deref().map(str::parse::<usize>) {
        None => snap.rankings.len(),
        Some(Ok(n)) => n,
        Some(Err(e)) => return error(StatusCode::BAD_REQUEST, "invalid_query", format!("limit: {e}")),
    };
    let rows: Vec<Value> = snap.rankings.iter().take(limit).map(report_json).collect();
    Json(json!({ "count": rows.len(), "reports": rows })).into_response()
}

async fn get_thresholds(State(state): State<Arc<AppState>>) -> Response {
    Json(state.thresholds()).into_response()
}

async fn put_thresholds(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let t: GateThresholds = match parse_body(&body) {
        Ok(t) => t,
        Err(resp) => return resp,
    };
    if let Err(e) = t.validate() {
        return error(StatusCode::BAD_REQUEST, "invalid_thresholds", e.to_string());
    }
    log::info!("thresholds updated: allow {} deny {}", t.allow, t.deny);
    *state.thresholds.write().expect("threshold lock") = t.clone();
    Json(t).into_response()
}

async fn reload(State(state): State<Arc<AppState>>) -> Response {
    let worker = state.clone();
    match tokio::task::spawn_blocking(move || worker.reload()).await {
        Ok(Ok(())) => Json(health_body(&state.snapshot())).into_response(),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, "reload_failed", e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
    }
}

/// Binds and serves until ctrl-c.
pub async fn serve(addr: std::net::SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
