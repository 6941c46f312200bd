use std::convert::Infallible;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use tokio::sync::broadcast::error::RecvError;

use romkit_core::registry::Registry;

use crate::api::{
    CreateSession, ErrorBody, FrameBatch, LiveAngleUpdate, MovementInfo, RecordingStarted, RomResponse, Session,
    SessionResults, StartRecording,
};
use crate::service::{LiveEvent, Service, ServiceError};

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(ServiceError::Invalid(e.body_text()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = match &self.0 {
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, "not-found"),
            ServiceError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            ServiceError::Invalid(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid"),
            ServiceError::Unusable(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unusable-recording"),
            ServiceError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        let body = ErrorBody {
            error: code.to_string(),
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(service: Service) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/movements", get(movements))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/recordings", post(start_recording))
        .route("/sessions/{id}/results", get(results))
        .route("/recordings/{id}/frames", post(append_frames))
        .route("/recordings/{id}/events", get(events))
        .route("/recordings/{id}/stop", post(stop_recording))
        .with_state(service)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn movements() -> Json<Vec<MovementInfo>> {
    let registry = Registry::builtin();
    let list = Registry::movement_names()
        .into_iter()
        .map(|name| {
            let requires_side = Registry::requires_side(name).unwrap_or(false);
            let side = requires_side.then_some(romkit_core::landmark::Side::Left);
            let def = registry.lookup(name, side).expect("built-in movements resolve");
            MovementInfo {
                name: name.to_string(),
                orientation: def.orientation,
                orientation_hint: def.orientation.hint().to_string(),
                requires_side,
            }
        })
        .collect();
    Json(list)
}

async fn create_session(
    State(service): State<Service>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Session>), ApiError> {
    let Json(req) = body?;
    let session = blocking(move || service.create_session(&req.subject)).await?;
    Ok((StatusCode::CREATED, Json(session)))
}

async fn list_sessions(State(service): State<Service>) -> Json<Vec<Session>> {
    Json(service.list_sessions())
}

async fn get_session(State(service): State<Service>, Path(id): Path<String>) -> ApiResult<Session> {
    Ok(Json(service.get_session(&id)?))
}

async fn start_recording(
    State(service): State<Service>,
    Path(id): Path<String>,
    body: Result<Json<StartRecording>, JsonRejection>,
) -> Result<(StatusCode, Json<RecordingStarted>), ApiError> {
    let Json(req) = body?;
    let started = blocking(move || service.start_recording(&id, &req)).await?;
    Ok((StatusCode::CREATED, Json(started)))
}

async fn append_frames(
    State(service): State<Service>,
    Path(id): Path<String>,
    body: Result<Json<FrameBatch>, JsonRejection>,
) -> ApiResult<LiveAngleUpdate> {
    let Json(batch) = body?;
    Ok(Json(blocking(move || service.append_frames(&id, batch)).await?))
}

async fn stop_recording(State(service): State<Service>, Path(id): Path<String>) -> ApiResult<RomResponse> {
    Ok(Json(blocking(move || service.stop_recording(&id)).await?))
}

async fn results(State(service): State<Service>, Path(id): Path<String>) -> ApiResult<SessionResults> {
    Ok(Json(service.results(&id)?))
}

fn to_event(event: &LiveEvent) -> Event {
    let (name, data) = match event {
        LiveEvent::Update(u) => ("update", serde_json::to_string(u)),
        LiveEvent::Result(r) => ("result", serde_json::to_string(r)),
        LiveEvent::Failed(m) => ("failed", serde_json::to_string(&serde_json::json!({ "message": m }))),
    };
    Event::default()
        .event(name)
        .data(data.expect("event payloads serialize"))
}

/// Server-sent events: the current state, then one `update` per accepted batch and a
/// final `result` or `failed` event when the recording is stopped.
async fn events(
    State(service): State<Service>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let (rx, snapshot) = service.subscribe(&id)?;
    let first = stream::once(async move { Ok(to_event(&LiveEvent::Update(snapshot))) });
    let rest = stream::unfold(Some(rx), |state| async move {
        let mut rx = state?;
        loop {
            match rx.recv().await {
                Ok(event) => {
                    let done = !matches!(event, LiveEvent::Update(_));
                    return Some((Ok(to_event(&event)), (!done).then_some(rx)));
                }
                Err(RecvError::Lagged(_)) => continue,
                Err(RecvError::Closed) => return None,
            }
        }
    });
    Ok(Sse::new(futures::StreamExt::chain(first, rest)).keep_alive(KeepAlive::new().interval(Duration::from_secs(15))))
}

/// Runs store operations, which touch the filesystem, off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(format!("worker failed: {e}")))?
}
