//! HTTP + WebSocket service for live gesture annotation sessions.
//!
//! | method | path                          | result                                   |
//! |--------|-------------------------------|------------------------------------------|
//! | POST   | `/sessions`                   | 201 `{session_id, started_at}`           |
//! | POST   | `/sessions/{id}/start`        | 200 `{state}`                            |
//! | POST   | `/sessions/{id}/stop`         | 200 final session log                    |
//! | GET    | `/sessions/{id}/summary`      | per-label totals, shares and timeline    |
//! | GET    | `/sessions/{id}/export.csv`   | CSV export (stopped sessions only)       |
//! | GET    | `/sessions/{id}/latency`      | server-side latency statistics           |
//! | GET    | `/healthz`                    | `ok`                                     |
//! | GET    | `/ws/sessions/{id}`           | socket: `frame` in, `recognition`/`interval`/`error` out |

mod session;

pub use session::{classify_hands, new_session_id, Registry, Session, SessionError, SessionHandle};

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use gesturelog_core::annotation::{export_csv, summarize};
use gesturelog_core::protocol::{parse_client_message, ClientMessage, ErrorCode, ServerMessage};
use gesturelog_core::{LabelMapping, LandmarkClassifier, SegmenterConfig, SessionState};

#[derive(Debug, Clone, Default)]
pub struct ServerConfig {
    /// Where `<session_id>.jsonl` files go; `None` disables persistence.
    pub log_dir: Option<PathBuf>,
    pub segmenter_defaults: SegmenterConfig,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    registry: Registry,
    model: Arc<LandmarkClassifier>,
    config: ServerConfig,
}

impl AppState {
    pub fn new(model: LandmarkClassifier, config: ServerConfig) -> Self {
        AppState { inner: Arc::new(Inner { registry: Registry::default(), model: Arc::new(model), config }) }
    }

    pub fn registry(&self) -> &Registry {
        &self.inner.registry
    }

    pub fn model(&self) -> &LandmarkClassifier {
        &self.inner.model
    }

    /// Test hook: records a latency sample as if a frame had taken `ms`.
    pub fn inject_latency(&self, session_id: &str, ms: f64) -> Result<(), SessionError> {
        self.registry().get(session_id)?.lock().record_latency(ms);
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct CreateSessionRequest {
    mapping: LabelMapping,
    #[serde(default)]
    config: Option<SegmenterConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub session_id: String,
    pub started_at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiErrorBody {
    pub error: String,
    pub message: String,
}

struct ApiError(StatusCode, &'static str, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ApiErrorBody { error: self.1.to_string(), message: self.2 })).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let msg = e.to_string();
        match e {
            SessionError::UnknownSession(_) => ApiError(StatusCode::NOT_FOUND, "unknown_session", msg),
            SessionError::InvalidState { .. } => ApiError(StatusCode::CONFLICT, "invalid_state", msg),
            SessionError::InvalidMapping(_) => ApiError(StatusCode::UNPROCESSABLE_ENTITY, "invalid_mapping", msg),
            SessionError::InvalidConfig(_) => ApiError(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", msg),
            SessionError::Journal(_) => ApiError(StatusCode::INTERNAL_SERVER_ERROR, "persistence", msg),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/start", post(start_session))
        .route("/sessions/{id}/stop", post(stop_session))
        .route("/sessions/{id}/summary", get(session_summary))
        .route("/sessions/{id}/export.csv", get(session_csv))
        .route("/sessions/{id}/latency", get(session_latency))
        .route("/ws/sessions/{id}", get(session_socket))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateSessionRequest = serde_json::from_slice(&body).map_err(|e| {
        // mapping validation runs during deserialization
        let kind = if e.is_data() { "invalid_mapping" } else { "malformed" };
        ApiError(StatusCode::UNPROCESSABLE_ENTITY, kind, e.to_string())
    })?;
    let config = req.config.unwrap_or(state.inner.config.segmenter_defaults);
    let (session_id, started_at) =
        state
            .registry()
            .create(req.mapping, config, state.inner.config.log_dir.as_deref())?;
    tracing::info!(%session_id, "session created");
    Ok((StatusCode::CREATED, Json(CreateSessionResponse { session_id, started_at })))
}

async fn start_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let handle = state.registry().get(&id)?;
    handle.lock().start()?;
    Ok(Json(serde_json::json!({ "state": SessionState::Recording })))
}

async fn stop_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let handle = state.registry().get(&id)?;
    let log = handle.lock().stop()?;
    tracing::info!(session_id = %id, intervals = log.intervals.len(), "session stopped");
    Ok(Json(log))
}

async fn session_summary(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let log = state.registry().get(&id)?.lock().log();
    Ok(Json(summarize(&log)))
}

async fn session_csv(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let log = state.registry().get(&id)?.lock().log();
    let bytes = export_csv(&log).map_err(|e| ApiError(StatusCode::CONFLICT, "invalid_state", e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], bytes))
}

async fn session_latency(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let stats = state.registry().get(&id)?.lock().latency_stats();
    Ok(Json(stats))
}

async fn session_socket(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let handle = state.registry().get(&id)?;
    Ok(ws.on_upgrade(move |socket| run_socket(socket, state, handle)))
}

/// One task per connection: each message is fully processed and its replies
/// sent before the next is read, so replies keep receive order.
async fn run_socket(mut socket: WebSocket, state: AppState, handle: SessionHandle) {
    while let Some(msg) = socket.recv().await {
        let received = Instant::now();
        let text = match msg {
            Ok(Message::Text(t)) => t,
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(Message::Binary(_)) => {
                let e = ServerMessage::error(ErrorCode::Malformed, "binary messages are not supported", None);
                if socket.send(Message::Text(e.to_json().into())).await.is_err() {
                    break;
                }
                continue;
            }
            Ok(_) => continue,
        };
        let replies = match parse_client_message(text.as_str()) {
            Ok(ClientMessage::Frame(frame)) => handle.lock().process_frame(&frame, state.model(), received),
            Err(e) => vec![ServerMessage::error(e.code(), e.to_string(), None)],
        };
        for r in replies {
            if socket.send(Message::Text(r.to_json().into())).await.is_err() {
                return;
            }
        }
    }
}
