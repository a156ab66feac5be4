//! HTTP prediction endpoint: one immutable model shared across request
//! handlers, per-request scratch, JSON over HTTP/1.1.
//!
//! POST /predict  {"title": str, "k": int?, "strategy": str?}
//!                -> {"predictions": [str], "latency_ms": f}
//! POST /explain  same request -> adds {"trace": {"instances", "provenance"}}
//! GET  /healthz  -> {"status": "ok", "labels": n, "instances": m}

use std::sync::Arc;
use std::time::Instant;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use graphite_core::inference::{self, InferenceConfig, RankingStrategy};
use graphite_core::model::GraphiteModel;

use crate::commands::trace_json;

pub fn router(model: Arc<GraphiteModel>) -> Router {
    Router::new()
        .route("/predict", post(predict))
        .route("/explain", post(explain))
        .route("/healthz", get(healthz))
        .with_state(model)
}

/// Binds `bind` and serves until interrupted, handling requests on a
/// `workers`-thread runtime.
pub fn run(model: GraphiteModel, bind: &str, workers: usize) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(workers.max(1))
        .enable_all()
        .build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind).await?;
        println!(
            "serving {} labels / {} instances on http://{} ({} workers)",
            model.num_labels(),
            model.num_instances(),
            listener.local_addr()?,
            workers
        );
        axum::serve(listener, router(Arc::new(model)))
            .with_graceful_shutdown(shutdown_signal())
            .await?;
        Ok(())
    })
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}

#[derive(Deserialize)]
struct ApiRequest {
    title: Option<String>,
    k: Option<i64>,
    strategy: Option<String>,
}

fn parse_request(body: &str) -> Result<(String, InferenceConfig), String> {
    let raw: ApiRequest =
        serde_json::from_str(body).map_err(|e| format!("malformed JSON: {e}"))?;
    let title = raw.title.ok_or_else(|| "missing title".to_owned())?;
    let k = raw.k.unwrap_or(10);
    if !(1..=100).contains(&k) {
        return Err(format!("k must be between 1 and 100, got {k}"));
    }
    let strategy = match raw.strategy {
        Some(name) => name.parse::<RankingStrategy>()?,
        None => RankingStrategy::Default,
    };
    Ok((
        title,
        InferenceConfig {
            k: k as usize,
            strategy,
            ..Default::default()
        },
    ))
}

fn bad_request(message: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": message }))).into_response()
}

async fn predict(State(model): State<Arc<GraphiteModel>>, body: String) -> Response {
    let (title, config) = match parse_request(&body) {
        Ok(parsed) => parsed,
        Err(message) => return bad_request(message),
    };
    let started = Instant::now();
    let predictions = inference::predict(&model, &title, &config);
    let latency_ms = started.elapsed().as_secs_f64() * 1e3;
    Json(json!({ "predictions": predictions, "latency_ms": latency_ms })).into_response()
}

async fn explain(State(model): State<Arc<GraphiteModel>>, body: String) -> Response {
    let (title, config) = match parse_request(&body) {
        Ok(parsed) => parsed,
        Err(message) => return bad_request(message),
    };
    let started = Instant::now();
    let (predictions, trace) = inference::explain(&model, &title, &config);
    let latency_ms = started.elapsed().as_secs_f64() * 1e3;
    Json(json!({
        "predictions": predictions,
        "latency_ms": latency_ms,
        "trace": trace_json(&trace),
    }))
    .into_response()
}

async fn healthz(State(model): State<Arc<GraphiteModel>>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "labels": model.num_labels(),
        "instances": model.num_instances(),
    }))
}
