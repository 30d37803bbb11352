//! HTTP API over a shared, swappable archive snapshot.
//!
//! - `POST /api/query` with a [`QueryRequest`] body returns one series per query.
//! - `GET /api/clips?query=&page=&page_size=&from=&to=` lists matching clips.
//! - `GET /api/meta` describes channels, shows, persons and the date range.
//! - `GET /api/videos/{id}` returns one video's metadata and commercial spans.
//! - `GET /api/health` reports the loaded snapshot.
//!
//! Errors are `{"error": ..., "offset": ...}` with status 400 or 404.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use newsframe_core::query::MAX_PAGE_SIZE;
use newsframe_core::Archive;
use serde::Serialize;

use crate::service::{self, DateRange, Defaults, ErrorBody, QueryRequest, ServiceError};
use crate::snapshot::Snapshot;

/// The archive requests read from. Handlers take one `Arc` at the start, so a
/// request never sees two snapshots.
pub struct AppState {
    current: RwLock<Arc<Snapshot>>,
    defaults: Defaults,
}

impl AppState {
    pub fn new(snapshot: Snapshot, defaults: Defaults) -> Self {
        AppState { current: RwLock::new(Arc::new(snapshot)), defaults }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().expect("snapshot lock"))
    }

    pub fn swap(&self, snapshot: Snapshot) {
        *self.current.write().expect("snapshot lock") = Arc::new(snapshot);
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/query", post(query))
        .route("/api/clips", get(clips))
        .route("/api/meta", get(meta))
        .route("/api/videos/:id", get(video))
        .route("/api/health", get(health))
        .with_state(state)
}

fn json_bytes(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json; charset=utf-8")], body).into_response()
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    json_bytes(status, serde_json::to_string(value).expect("response serializes"))
}

fn error(e: &ServiceError) -> Response {
    let status = match e {
        ServiceError::UnknownVideo(_) => StatusCode::NOT_FOUND,
        _ => StatusCode::BAD_REQUEST,
    };
    json(status, &ErrorBody::from(e))
}

fn bad_request(message: String) -> Response {
    json(StatusCode::BAD_REQUEST, &ErrorBody { error: message, offset: None })
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T: Send + 'static>(work: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(work).await.expect("query task panicked")
}

async fn query(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: QueryRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return bad_request(format!("invalid request body: {e}")),
    };
    let snap = state.snapshot();
    let defaults = state.defaults;
    blocking(move || match service::run_query(&snap.archive, &req, defaults) {
        Ok(resp) => json_bytes(StatusCode::OK, service::to_json(&resp)),
        Err(e) => error(&e),
    })
    .await
}

fn param<T: std::str::FromStr>(params: &HashMap<String, String>, key: &str, default: T) -> Result<T, String> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v.trim().parse().map_err(|_| format!("invalid {key} {v:?}")),
    }
}

fn parse_range(params: &HashMap<String, String>) -> Result<DateRange, String> {
    let date = |key: &str| -> Result<_, String> {
        params
            .get(key)
            .map(|v| v.trim().parse().map_err(|_| format!("invalid {key} date {v:?}")))
            .transpose()
    };
    Ok(DateRange { from: date("from")?, to: date("to")? })
}

async fn clips(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let Some(text) = params.get("query").cloned() else {
        return bad_request("missing query parameter".into());
    };
    let parsed = param(&params, "page", 0usize)
        .and_then(|page| Ok((page, param(&params, "page_size", 50usize)?)))
        .and_then(|(page, size)| Ok((page, size, parse_range(&params)?)));
    let (page, page_size, range) = match parsed {
        Ok(v) => v,
        Err(m) => return bad_request(m),
    };
    if page_size == 0 || page_size > MAX_PAGE_SIZE {
        return bad_request(format!("page_size must be between 1 and {MAX_PAGE_SIZE}"));
    }
    let snap = state.snapshot();
    blocking(move || match service::run_clips(&snap.archive, &text, page, page_size, range) {
        Ok(resp) => json(StatusCode::OK, &resp),
        Err(e) => error(&e),
    })
    .await
}

async fn meta(State(state): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, &service::meta(&state.snapshot().archive))
}

async fn video(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match service::video(&state.snapshot().archive, &id) {
        Ok(v) => json(StatusCode::OK, &v),
        Err(e) => error(&e),
    }
}

#[derive(Serialize)]
struct Health<'a> {
    status: &'static str,
    version: &'static str,
    snapshot: &'a str,
    videos: usize,
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let snap = state.snapshot();
    let body = Health {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
        snapshot: &snap.id,
        videos: snap.archive.video_count(),
    };
    json(StatusCode::OK, &body)
}

/// Serves until interrupted. On Unix, SIGHUP reloads the snapshot via `reload`.
pub async fn serve(
    state: Arc<AppState>,
    addr: &str,
    reload: impl Fn() -> Option<Snapshot> + Send + Sync + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    #[cfg(unix)]
    {
        let state = Arc::clone(&state);
        let mut hup = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::hangup())?;
        tokio::spawn(async move {
            while hup.recv().await.is_some() {
                let reload = &reload;
                if let Some(snap) = reload() {
                    eprintln!("reloaded snapshot {}", snap.id);
                    state.swap(snap);
                }
            }
        });
    }
    #[cfg(not(unix))]
    let _ = reload;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Convenience for tests and embedding.
pub fn state_for(archive: Archive, id: &str, defaults: Defaults) -> Arc<AppState> {
    Arc::new(AppState::new(Snapshot { archive, id: id.to_string() }, defaults))
}
