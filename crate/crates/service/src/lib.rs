//! HTTP+JSON service for live ROM sessions.
//!
//! | Method | Path | Body | Response |
//! |---|---|---|---|
//! | GET | `/health` | | `{"status":"ok"}` |
//! | GET | `/movements` | | registered movements with orientation guidance |
//! | POST | `/sessions` | `{"subject"}` | session |
//! | GET | `/sessions` | | every stored session |
//! | GET | `/sessions/{id}` | | session with its recordings |
//! | POST | `/sessions/{id}/recordings` | `{"movement","side","repetition","source","nominal_rate"}` | `{"recording_id","orientation_hint","segment_landmarks",...}` |
//! | POST | `/recordings/{id}/frames` | `{"frames":[{"t","lm":{"NAME":[x,y,z,v]}}]}` | live angle update |
//! | GET | `/recordings/{id}/events` | | server-sent `update`, `result`, `failed` events |
//! | POST | `/recordings/{id}/stop` | | ROM result |
//! | GET | `/sessions/{id}/results` | | per-movement repetitions, mean and range |
//!
//! Errors are `{"error": code, "message": text}` with status 404, 409, 422 or 500.

pub mod api;
pub mod routes;
pub mod service;

use std::future::Future;

use tokio::net::TcpListener;

pub use routes::router;
pub use service::{Service, ServiceConfig, ServiceError};

/// Serves until `shutdown` resolves, then flushes open recordings.
pub async fn serve(
    listener: TcpListener,
    service: Service,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = router(service.clone());
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    service.flush().map_err(std::io::Error::other)
}
