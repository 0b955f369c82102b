//! Read-only HTTP API over a finished campaign.

use std::sync::Arc;

use anyhow::{Context, Result};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use psl_core::campaign::{sample_front, Checkpoint};
use psl_core::problems::ProblemSpec;
use psl_core::psmodel::ParetoSetModel;
use psl_core::rng::{self, Phase};
use psl_core::scalarize::{IdealState, Preference};
use psl_core::surrogate::SurrogateBundle;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

/// Largest `/front` sample count served in one response.
pub const MAX_FRONT_SAMPLES: usize = 100_000;
const DEFAULT_FRONT_SAMPLES: usize = 1000;

/// Immutable model, surrogates and archive loaded at startup.
pub struct Snapshot {
    pub problem: ProblemSpec,
    pub model: ParetoSetModel,
    pub surrogates: SurrogateBundle,
    pub ideal: IdealState,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub seed: u64,
}

impl Snapshot {
    pub fn from_checkpoint(cp: &Checkpoint) -> Result<Self> {
        let fm = cp
            .final_model
            .as_ref()
            .context("checkpoint has no trained model; finish the campaign first")?;
        let surrogates = cp.final_surrogates()?.context("checkpoint has no surrogate parameters")?;
        Ok(Self {
            problem: cp.problem()?,
            model: fm.model.clone(),
            surrogates,
            ideal: fm.ideal.clone(),
            x: cp.state.x.clone(),
            y: cp.state.y.clone(),
            seed: cp.config.seed,
        })
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

#[derive(Serialize)]
struct Meta {
    problem: String,
    n: usize,
    m: usize,
    bounds: Bounds,
    reference_point: Vec<f64>,
}

#[derive(Serialize)]
struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize)]
struct Solution {
    lambda: Vec<f64>,
    x: Vec<f64>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

#[derive(Serialize)]
struct ArchiveEntry<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

#[derive(Deserialize)]
struct SolutionQuery {
    lambda: Option<String>,
}

#[derive(Deserialize)]
struct FrontQuery {
    samples: Option<usize>,
}

/// Parses `v1,...,vm`, rejecting negative or non-finite weights, and
/// renormalizes to the simplex.
pub fn parse_preference(raw: &str, m: usize) -> std::result::Result<Preference, String> {
    let weights = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad weight {s:?}: {e}")))
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    if weights.len() != m {
        return Err(format!("lambda needs {m} weights, got {}", weights.len()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err("lambda weights must be finite and non-negative".into());
    }
    Preference::normalized(weights).map_err(|e| e.to_string())
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn meta(State(s): State<Arc<Snapshot>>) -> Json<Meta> {
    Json(Meta {
        problem: s.problem.name.clone(),
        n: s.problem.n,
        m: s.problem.m,
        bounds: Bounds {
            lower: s.problem.lower_bounds.clone(),
            upper: s.problem.upper_bounds.clone(),
        },
        reference_point: s.problem.reference_point.clone(),
    })
}

async fn solution(State(s): State<Arc<Snapshot>>, Query(q): Query<SolutionQuery>) -> Result<Json<Solution>, ApiError> {
    let raw = q.lambda.ok_or_else(|| bad_request("missing lambda parameter"))?;
    let pref = parse_preference(&raw, s.problem.m).map_err(bad_request)?;
    let x = s.model.forward(&pref).map_err(internal)?;
    let (mean, std) = s.surrogates.predict(&x);
    Ok(Json(Solution {
        lambda: pref.weights().to_vec(),
        x,
        mean,
        std,
    }))
}

async fn front(State(s): State<Arc<Snapshot>>, Query(q): Query<FrontQuery>) -> Response {
    let count = q.samples.unwrap_or(DEFAULT_FRONT_SAMPLES);
    if count == 0 || count > MAX_FRONT_SAMPLES {
        return bad_request(format!("samples must be between 1 and {MAX_FRONT_SAMPLES}")).into_response();
    }
    // Same preferences for the same request, whatever the request order.
    let mut r = rng::stream(s.seed, Phase::Export, count);
    match sample_front(&s.model, &s.surrogates, count, &mut r) {
        Ok(samples) => Json(samples).into_response(),
        Err(e) => internal(e).into_response(),
    }
}

async fn archive(State(s): State<Arc<Snapshot>>) -> Response {
    let entries: Vec<ArchiveEntry> = s.x.iter().zip(&s.y).map(|(x, y)| ArchiveEntry { x, y }).collect();
    Json(entries).into_response()
}

pub fn router(snapshot: Arc<Snapshot>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/meta", get(meta))
        .route("/solution", get(solution))
        .route("/front", get(front))
        .route("/archive", get(archive))
        .layer(CorsLayer::permissive())
        .with_state(snapshot)
}
