//! HTTP API for interactive sessions.
//!
//! Every JSON response uses the same envelope: `{ok, data, error,
//! sessionVersion}`. Actions carry the version they were computed against
//! and are rejected with 409 if another action committed first. Progress
//! and new log events stream over `GET /sessions/{id}/events`.

mod api;
mod store;

pub use api::{ApiError, Envelope, ErrorBody};
pub use store::{Sessions, StreamItem};

use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kdecl::pipeline::{export_archive, Action, BasicInfo, Pipeline, PipelineConfig, PipelineError, Session};
use kdecl::retrieval::DemoStore;
use kdecl::llm::SharedBackend;
use kdecl::{lint_source, viz};
use serde::{Deserialize, Serialize};
use tokio_stream::wrappers::BroadcastStream;
use tokio_stream::{Stream, StreamExt};

use store::CommitError;

pub struct AppState {
    pub backend: SharedBackend,
    pub store: Arc<DemoStore>,
    pub config: PipelineConfig,
    pub sessions: Sessions,
    /// When set, every route except `/health` needs `Authorization: Bearer`.
    pub token: Option<String>,
}

impl AppState {
    pub fn new(
        backend: SharedBackend,
        store: DemoStore,
        config: PipelineConfig,
        data_dir: Option<PathBuf>,
        token: Option<String>,
    ) -> std::io::Result<Self> {
        Ok(AppState {
            backend,
            store: Arc::new(store),
            config,
            sessions: Sessions::open(data_dir)?,
            token,
        })
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    let api = Router::new()
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/actions", post(apply_action))
        .route("/sessions/{id}/layout", get(layout))
        .route("/sessions/{id}/export", get(export))
        .route("/sessions/{id}/events", get(events))
        .route("/lint", post(lint))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .route("/health", get(health))
        .merge(api)
        .with_state(state)
}

async fn require_token(State(state): State<Shared>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let given = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given != Some(token.as_str()) {
            return ApiError::Unauthorized.into_response();
        }
    }
    next.run(req).await
}

/// Body extractor whose rejection uses the envelope.
struct Body400<T>(T);

impl<S: Send + Sync, T: serde::de::DeserializeOwned> axum::extract::FromRequest<S> for Body400<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body400(v)),
            Err(e) => Err(ApiError::BadRequest(e.body_text())),
        }
    }
}

async fn health() -> Response {
    api::ok(StatusCode::OK, serde_json::json!({ "status": "ok" }), None)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Summary {
    id: String,
    task_name: String,
    stage: kdecl::pipeline::Stage,
    version: u64,
}

async fn list_sessions(State(state): State<Shared>) -> Response {
    let list: Vec<Summary> = state
        .sessions
        .ids()
        .into_iter()
        .filter_map(|id| state.sessions.snapshot(&id))
        .map(|(s, version)| Summary {
            id: s.id,
            task_name: s.basic_info.task_name,
            stage: s.stage,
            version,
        })
        .collect();
    api::ok(StatusCode::OK, list, None)
}

async fn create_session(State(state): State<Shared>, Body400(info): Body400<BasicInfo>) -> Result<Response, ApiError> {
    let pipeline = Pipeline::new(state.backend.clone(), state.store.clone(), state.config.clone());
    let session = pipeline.start_session(info)?;
    let version = state.sessions.insert(session.clone()).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(api::ok(StatusCode::CREATED, session, Some(version)))
}

fn snapshot(state: &AppState, id: &str) -> Result<(Session, u64), ApiError> {
    state.sessions.snapshot(id).ok_or_else(|| ApiError::NotFound(id.to_string()))
}

async fn get_session(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (session, version) = snapshot(&state, &id)?;
    Ok(api::ok(StatusCode::OK, session, Some(version)))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ActionRequest {
    /// Version the client last saw; omitted means "whatever is current".
    expected_version: Option<u64>,
    #[serde(flatten)]
    action: Action,
}

async fn apply_action(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Body400(req): Body400<ActionRequest>,
) -> Result<Response, ApiError> {
    let (mut session, base) = snapshot(&state, &id)?;
    if let Some(expected) = req.expected_version {
        if expected != base {
            return Err(ApiError::VersionConflict { expected, current: base });
        }
    }
    let sender = state.sessions.sender(&id).ok_or_else(|| ApiError::NotFound(id.clone()))?;
    let worker = state.clone();
    let (session, result) = tokio::task::spawn_blocking(move || {
        let pipeline = Pipeline::new(worker.backend.clone(), worker.store.clone(), worker.config.clone())
            .with_observer(Arc::new(move |p| {
                let _ = sender.send(StreamItem::Progress(p.clone()));
            }));
        let result = pipeline.apply(&mut session, req.action);
        (session, result)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;

    // A session that ran out of refinement rounds keeps its best attempt, so
    // it is committed like a success.
    let keep = matches!(result, Ok(()) | Err(PipelineError::MaxIterationsExceeded { .. }));
    if !keep {
        return Err(result.expect_err("not kept").into());
    }
    let version = match state.sessions.commit(session.clone(), base) {
        Ok(v) => v,
        Err(CommitError::Missing) => return Err(ApiError::NotFound(id)),
        Err(CommitError::Conflict(current)) => return Err(ApiError::VersionConflict { expected: base, current }),
        Err(CommitError::Io(e)) => return Err(ApiError::Internal(e.to_string())),
    };
    Ok(match result {
        Ok(()) => api::ok(StatusCode::OK, session, Some(version)),
        Err(e) => ApiError::from(e).with_data(Some(session), Some(version)),
    })
}

async fn layout(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (session, version) = snapshot(&state, &id)?;
    let graph = session.graph().ok_or(ApiError::NoGraph)?;
    let data = serde_json::json!({
        "layout": viz::to_layout(&graph),
        "dot": viz::to_dot(&graph),
    });
    Ok(api::ok(StatusCode::OK, data, Some(version)))
}

async fn export(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (session, _) = snapshot(&state, &id)?;
    let bytes = export_archive(&session).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/x-tar".to_string()),
            (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{id}.tar\"")),
        ],
        Body::from(bytes),
    )
        .into_response())
}

#[derive(Deserialize)]
struct EventsQuery {
    /// First event sequence number to send.
    since: Option<usize>,
}

fn sse_event(item: &StreamItem) -> SseEvent {
    let (name, data) = match item {
        StreamItem::Event(e) => ("event", serde_json::to_string(e)),
        StreamItem::Progress(p) => ("progress", serde_json::to_string(p)),
        StreamItem::Version { version } => ("version", serde_json::to_string(&serde_json::json!({ "version": version }))),
    };
    let out = SseEvent::default().event(name).data(data.expect("stream item serializes"));
    match item {
        StreamItem::Event(e) => out.id(e.seq.to_string()),
        _ => out,
    }
}

/// Replays logged events from `?since` (or just after `Last-Event-ID`), then
/// follows the live channel.
async fn events(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(query): Query<EventsQuery>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>, ApiError> {
    // Subscribing first means nothing committed after the snapshot is lost;
    // duplicates are filtered by sequence number.
    let live = state.sessions.sender(&id).ok_or_else(|| ApiError::NotFound(id.clone()))?.subscribe();
    let (session, _) = snapshot(&state, &id)?;
    let after_header = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|n| n + 1);
    let from = query.since.or(after_header).unwrap_or(0);
    let next = session.events.len().max(from);
    let backlog: Vec<StreamItem> = session.events.into_iter().skip(from).map(StreamItem::Event).collect();
    let live = BroadcastStream::new(live).filter_map(move |item| match item {
        Ok(StreamItem::Event(e)) if e.seq < next => None,
        Ok(item) => Some(item),
        // A lagging subscriber skips what it missed; clients resync with `since`.
        Err(_) => None,
    });
    let stream = tokio_stream::iter(backlog)
        .chain(live)
        .map(|item| Ok::<_, Infallible>(sse_event(&item)));
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

#[derive(Deserialize)]
struct LintRequest {
    source: String,
}

async fn lint(Body400(req): Body400<LintRequest>) -> Response {
    api::ok(StatusCode::OK, lint_source(&req.source), None)
}
