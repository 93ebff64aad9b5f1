//! HTTP service over a single shared engine.
//!
//! Ingests take the write lock, so concurrent updates apply one at a time.
//! Engine calls run on the blocking pool because the remote provider uses a
//! blocking client.

use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use recallm::{AskMode, AskTrace, Engine, Error as CoreError, IngestReport, Stats};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Settings;

pub type SharedEngine = Arc<RwLock<Engine>>;

#[derive(Debug, Deserialize)]
pub struct IngestBody {
    pub text: String,
}

#[derive(Debug, Deserialize)]
pub struct AskBody {
    pub question: String,
    #[serde(default = "default_mode")]
    pub mode: AskMode,
}

fn default_mode() -> AskMode {
    AskMode::Graph
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: &'static str,
    detail: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, detail: impl Into<String>) -> Self {
        Self { status, error, detail: detail.into() }
    }

    fn internal(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", detail)
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let (status, kind) = match &e {
            CoreError::InvalidArgument(_) | CoreError::InvalidLabel { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid_argument")
            }
            CoreError::Provider(_) | CoreError::Embedding(_) => (StatusCode::BAD_GATEWAY, "provider"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, kind, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.error, detail: self.detail })).into_response()
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed_json", e.to_string()))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?
}

async fn ingest(State(engine): State<SharedEngine>, body: Bytes) -> Result<Json<IngestReport>, ApiError> {
    let req: IngestBody = parse(&body)?;
    let report = blocking(move || {
        let mut guard = engine.write().map_err(|_| ApiError::internal("engine lock poisoned"))?;
        Ok(guard.ingest(&req.text)?)
    })
    .await?;
    Ok(Json(report))
}

async fn ask(State(engine): State<SharedEngine>, body: Bytes) -> Result<Json<AskTrace>, ApiError> {
    let req: AskBody = parse(&body)?;
    let trace = blocking(move || {
        let guard = engine.read().map_err(|_| ApiError::internal("engine lock poisoned"))?;
        Ok(guard.ask(&req.question, req.mode)?)
    })
    .await?;
    Ok(Json(trace))
}

async fn stats(State(engine): State<SharedEngine>) -> Result<Json<Stats>, ApiError> {
    let guard = engine.read().map_err(|_| ApiError::internal("engine lock poisoned"))?;
    Ok(Json(guard.stats()))
}

async fn graph_export(State(engine): State<SharedEngine>) -> Result<Json<serde_json::Value>, ApiError> {
    let guard = engine.read().map_err(|_| ApiError::internal("engine lock poisoned"))?;
    Ok(Json(guard.graph().snapshot_value()))
}

pub fn router(engine: SharedEngine) -> Router {
    Router::new()
        .route("/ingest", post(ingest))
        .route("/ask", post(ask))
        .route("/stats", get(stats))
        .route("/graph/export", get(graph_export))
        .with_state(engine)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    log::info!("shutting down");
}

/// Loads the engine, serves until SIGINT or SIGTERM, then writes the
/// snapshots back.
pub fn serve_blocking(settings: Settings) -> anyhow::Result<()> {
    // Built outside the runtime: the remote client must not be created or
    // dropped on an async worker.
    let engine: SharedEngine = Arc::new(RwLock::new(crate::open_engine(&settings)?));
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let app = router(Arc::clone(&engine));
    let addr = settings.addr.clone();
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app).with_graceful_shutdown(shutdown_signal()).await?;
        anyhow::Ok(())
    })?;
    drop(runtime);
    let engine = engine.read().map_err(|_| anyhow::anyhow!("engine lock poisoned"))?;
    crate::save(&engine, &settings)?;
    eprintln!("snapshots written to {}", settings.data_dir.display());
    Ok(())
}
