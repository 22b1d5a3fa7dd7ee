//! HTTP service over the decoder and semantic editor.
//!
//! | route                                      | method | result                         |
//! |--------------------------------------------|--------|--------------------------------|
//! | `/api/sessions`                            | POST   | 201, session metadata          |
//! | `/api/sessions/{id}`                       | DELETE | 204                            |
//! | `/api/sessions/{id}/frames/{i}/semantics`  | GET    | effective semantics + revision |
//! | `/api/sessions/{id}/edits`                 | POST   | revision + first-frame result  |
//! | `/api/sessions/{id}/frames/{i}/render`     | GET    | `image/png`, `X-Revision`      |
//!
//! An edit body is `{"frames": [a, b], "command": {...}}` with an inclusive
//! frame range and an edit command (`target`, `mode`, `indices`, `values`).
//! The command `{"target": "Reset"}` drops every edit of the session and
//! needs no `frames`. Errors are `{"code", "message"}` with status 400 or 404.

pub mod error;
pub mod session;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use ihvc_core::{Edit, Semantics};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tower_http::services::ServeDir;
use uuid::Uuid;

pub use error::{ApiError, ErrorBody};
pub use session::{Session, SessionInfo, SessionStore, DEFAULT_CACHE_FRAMES, DEFAULT_IDLE_TIMEOUT};

/// Upload limit for `POST /api/sessions`.
pub const MAX_UPLOAD_BYTES: usize = 64 * 1024 * 1024;
pub const REVISION_HEADER: &str = "x-revision";
pub const RESET_TARGET: &str = "Reset";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub cache_frames: usize,
    pub idle_timeout: Duration,
    /// Static client bundle served for every non-API path.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            cache_frames: DEFAULT_CACHE_FRAMES,
            idle_timeout: DEFAULT_IDLE_TIMEOUT,
            ui_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSemantics {
    pub frame: usize,
    pub revision: u64,
    #[serde(flatten)]
    pub semantics: Semantics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EditResponse {
    pub revision: u64,
    pub frame: usize,
    pub semantics: Semantics,
}

pub fn router(store: Arc<SessionStore>, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route(
            "/api/sessions",
            post(create_session).layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES)),
        )
        .route("/api/sessions/{id}", delete(delete_session))
        .route("/api/sessions/{id}/frames/{frame}/semantics", get(get_semantics))
        .route("/api/sessions/{id}/frames/{frame}/render", get(render_frame))
        .route("/api/sessions/{id}/edits", post(post_edit))
        .with_state(store);
    match &config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Periodically drops idle sessions until the store is dropped elsewhere.
pub fn spawn_expiry(store: Arc<SessionStore>, every: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        loop {
            tick.tick().await;
            store.expire_idle();
        }
    })
}

async fn create_session(
    State(store): State<Arc<SessionStore>>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let session = tokio::task::spawn_blocking(move || Session::load(Uuid::new_v4(), &body))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    let info = session.info.clone();
    store.insert(session);
    Ok((StatusCode::CREATED, Json(info)))
}

async fn delete_session(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    store.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

fn parse_frame(raw: &str) -> Result<usize, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::bad_request("invalid_frame", format!("bad frame index {raw:?}")))
}

async fn get_semantics(
    State(store): State<Arc<SessionStore>>,
    Path((id, frame)): Path<(String, String)>,
) -> Result<Json<FrameSemantics>, ApiError> {
    let (_, session) = store.get(&id)?;
    let frame = parse_frame(&frame)?;
    let s = session.read().unwrap();
    Ok(Json(FrameSemantics {
        frame,
        revision: s.revision(),
        semantics: s.effective(frame)?,
    }))
}

#[derive(Deserialize)]
struct EditRequest {
    frames: [usize; 2],
    command: Edit,
}

fn malformed(e: serde_json::Error) -> ApiError {
    ApiError::bad_request("invalid_request", e.to_string())
}

async fn post_edit(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<EditResponse>, ApiError> {
    let (_, session) = store.get(&id)?;
    let value: Value = serde_json::from_slice(&body).map_err(malformed)?;
    let is_reset = value
        .pointer("/command/target")
        .and_then(Value::as_str)
        .is_some_and(|t| t == RESET_TARGET);
    let mut s = session.write().unwrap();
    let (revision, frame) = if is_reset {
        let frame = match value.get("frames") {
            Some(f) => serde_json::from_value::<[usize; 2]>(f.clone()).map_err(malformed)?[0],
            None => 0,
        };
        (s.reset(), frame)
    } else {
        let req: EditRequest = serde_json::from_value(value).map_err(malformed)?;
        let [a, b] = req.frames;
        (s.edit(a, b, req.command)?, a)
    };
    Ok(Json(EditResponse {
        revision,
        frame,
        semantics: s.effective(frame)?,
    }))
}

async fn render_frame(
    State(store): State<Arc<SessionStore>>,
    Path((id, frame)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let (uuid, session) = store.get(&id)?;
    let frame = parse_frame(&frame)?;
    // Semantics and revision are read under one lock so the rendered image
    // always matches the revision it is labelled with.
    let (sem, revision, renderer) = {
        let s = session.read().unwrap();
        (s.effective(frame)?, s.revision(), s.renderer.clone())
    };
    let key = (uuid, frame, revision);
    let png = match store.cached(&key) {
        Some(png) => png,
        None => {
            let png = tokio::task::spawn_blocking(move || renderer.render(&sem).encode_png())
                .await
                .map_err(|e| ApiError::internal(e.to_string()))?
                .map_err(|e| ApiError::internal(e.to_string()))?;
            let png = Arc::new(png);
            store.store_frame(key, png.clone());
            png
        }
    };
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("image/png")),
            (
                header::HeaderName::from_static(REVISION_HEADER),
                HeaderValue::from(revision),
            ),
        ],
        png.as_ref().clone(),
    )
        .into_response())
}
