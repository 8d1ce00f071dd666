//! HTTP front end: `POST /render`, `GET /presets`, `GET /health`.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use juliart_core::gallery;
use serde::Serialize;
use tokio::sync::Semaphore;

use crate::job::{render, JobError, RenderOutput, RenderRequest};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Simultaneous render jobs; further requests get 503.
    pub max_jobs: usize,
    /// Largest accepted image side.
    pub max_size: u32,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { max_jobs: rayon::current_num_threads().max(1), max_size: 4096 }
    }
}

#[derive(Clone)]
struct AppState {
    jobs: Arc<Semaphore>,
    max_size: u32,
}

/// Error body shared by every non-PNG response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<u32>,
}

impl Diagnostic {
    fn plain(kind: &str, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), message: message.into(), line: None, col: None }
    }
}

fn reply(status: StatusCode, d: Diagnostic) -> Response {
    (status, Json(d)).into_response()
}

fn job_error(e: JobError) -> Response {
    match e {
        JobError::Request(m) => reply(StatusCode::BAD_REQUEST, Diagnostic::plain("request", m)),
        JobError::Scene(e) => {
            let span = e.span();
            let d = Diagnostic {
                kind: e.kind().into(),
                message: e.message(),
                line: Some(span.line),
                col: Some(span.col),
            };
            reply(StatusCode::UNPROCESSABLE_ENTITY, d)
        }
        JobError::Encode(e) => reply(StatusCode::INTERNAL_SERVER_ERROR, Diagnostic::plain("encode", e.to_string())),
    }
}

fn png_response(out: RenderOutput) -> Response {
    let t = out.timings;
    let timing = format!(
        "parse;dur={:.3}, evaluate;dur={:.3}, rasterize;dur={:.3}, encode;dur={:.3}",
        t.parse_ms, t.evaluate_ms, t.rasterize_ms, t.encode_ms
    );
    let mut res = (StatusCode::OK, out.png).into_response();
    let h = res.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    h.insert("server-timing", HeaderValue::from_str(&timing).expect("ascii"));
    h.insert("x-primitives", HeaderValue::from(out.primitives as u64));
    h.insert("x-iterations", HeaderValue::from(out.iterations));
    res
}

async fn render_handler(State(state): State<AppState>, body: Result<Json<RenderRequest>, JsonRejection>) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return reply(StatusCode::BAD_REQUEST, Diagnostic::plain("request", e.body_text())),
    };
    let job = match req.into_job(state.max_size) {
        Ok(j) => j,
        Err(e) => return job_error(e),
    };
    let Ok(permit) = state.jobs.clone().try_acquire_owned() else {
        return reply(StatusCode::SERVICE_UNAVAILABLE, Diagnostic::plain("busy", "render job limit reached, retry later"));
    };
    let result = tokio::task::spawn_blocking(move || {
        let _permit = permit;
        render(&job)
    })
    .await;
    match result {
        Ok(Ok(out)) => png_response(out),
        Ok(Err(e)) => job_error(e),
        Err(e) => reply(StatusCode::INTERNAL_SERVER_ERROR, Diagnostic::plain("internal", e.to_string())),
    }
}

#[derive(Debug, Serialize)]
struct PresetInfo {
    name: &'static str,
    title: &'static str,
    source: &'static str,
    variation: &'static str,
    seed: [f64; 2],
    viewport: [f64; 4],
    max_steps: u32,
}

async fn presets_handler() -> Json<Vec<PresetInfo>> {
    Json(
        gallery::presets()
            .into_iter()
            .map(|p| PresetInfo {
                name: p.name,
                title: p.title,
                source: p.source,
                variation: p.variation,
                seed: [p.seed.re, p.seed.im],
                viewport: [p.viewport.left(), p.viewport.right(), p.viewport.bottom(), p.viewport.top()],
                max_steps: p.max_steps,
            })
            .collect(),
    )
}

async fn health_handler() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn fallback() -> Response {
    reply(StatusCode::NOT_FOUND, Diagnostic::plain("request", "no such endpoint"))
}

pub fn router(config: ServiceConfig) -> Router {
    let state = AppState { jobs: Arc::new(Semaphore::new(config.max_jobs)), max_size: config.max_size };
    Router::new()
        .route("/render", post(render_handler))
        .route("/presets", get(presets_handler))
        .route("/health", get(health_handler))
        .fallback(fallback)
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(port: u16, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
