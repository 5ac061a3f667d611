//! HTTP and WebSocket routes.
//!
//! | route | |
//! |---|---|
//! | `POST /session` | create a session from an optional [`SessionConfig`] body |
//! | `GET /session/{id}/graph` | service graph as DOT text |
//! | `GET /session/{id}/transcript` | transcript so far as JSON |
//! | `GET /healthz` | liveness |
//! | `GET /ws/session/{id}` | event socket; replays the session's past events first |

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::Mutex;

use crate::error::{ErrorCode, GatewayError};
use crate::protocol::{ClientEvent, ServerEvent};
use crate::session::{Session, SessionConfig};

type Shared = Arc<Mutex<Session>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Shared>>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    fn get(&self, id: &str) -> Result<Shared, GatewayError> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| GatewayError::UnknownSession(id.to_string()))
    }

    fn insert(&self, session: Session) -> String {
        let id = session.id().to_string();
        self.sessions.write().unwrap_or_else(|p| p.into_inner()).insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }
}

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let status = match self.code() {
            ErrorCode::UnknownSession => StatusCode::NOT_FOUND,
            ErrorCode::ServiceStartFailure | ErrorCode::DialogFailure | ErrorCode::NoResponse => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            ErrorCode::SessionTerminated => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        (status, Json(json!({"code": self.code(), "detail": self.to_string()}))).into_response()
    }
}

#[derive(Debug, Serialize)]
pub struct Created {
    pub id: String,
    pub socket: String,
    pub active_domain: Option<String>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/session", post(create_session))
        .route("/session/{id}/graph", get(graph))
        .route("/session/{id}/transcript", get(transcript))
        .route("/ws/session/{id}", get(socket))
        .with_state(state)
}

/// Serves [`router`] on `listener` until the task is dropped.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn healthz(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({"status": "ok", "sessions": state.session_count()}))
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<Created>), GatewayError> {
    let config: SessionConfig = if body.iter().all(u8::is_ascii_whitespace) {
        SessionConfig::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| GatewayError::BadRequest(e.to_string()))?
    };
    let id = uuid::Uuid::new_v4().to_string();
    let session = tokio::task::spawn_blocking(move || Session::create(id, &config))
        .await
        .map_err(|e| GatewayError::ServiceStartFailure(e.to_string()))??;
    let active_domain = session.active_domain().map(str::to_string);
    let id = state.insert(session);
    log::info!("session {id} created");
    Ok((StatusCode::CREATED, Json(Created { socket: format!("/ws/session/{id}"), id, active_domain })))
}

async fn graph(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, GatewayError> {
    let session = state.get(&id)?;
    let dot = session.lock().await.graph().to_string();
    Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz; charset=utf-8")], dot).into_response())
}

async fn transcript(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, GatewayError> {
    let session = state.get(&id)?;
    let entries = session.lock().await.transcript().to_vec();
    Ok(Json(entries).into_response())
}

async fn socket(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, GatewayError> {
    let session = state.get(&id)?;
    Ok(ws.on_upgrade(move |socket| run_socket(socket, session)))
}

async fn send(socket: &mut WebSocket, events: &[ServerEvent]) -> bool {
    for e in events {
        let text = match serde_json::to_string(e) {
            Ok(t) => t,
            Err(err) => {
                log::error!("cannot encode {e:?}: {err}");
                continue;
            }
        };
        if socket.send(Message::Text(text.into())).await.is_err() {
            return false;
        }
    }
    true
}

async fn run_socket(mut socket: WebSocket, session: Shared) {
    let past = session.lock().await.history().to_vec();
    if !send(&mut socket, &past).await {
        return;
    }
    while let Some(Ok(message)) = socket.recv().await {
        let event = match message {
            Message::Text(text) => ClientEvent::from_json(text.as_str()),
            Message::Binary(_) => Err(GatewayError::BadRequest("binary frames are not supported".into())),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        let mut guard = Arc::clone(&session).lock_owned().await;
        let handled = tokio::task::spawn_blocking(move || match event {
            Ok(event) => guard.handle(event),
            Err(e) => guard.reject(&e),
        })
        .await;
        let events = match handled {
            Ok(events) => events,
            Err(e) => vec![ServerEvent::from(&GatewayError::Dialog(e.to_string()))],
        };
        if !send(&mut socket, &events).await {
            break;
        }
    }
}
