//! Stateless verification service.
//!
//! - `POST /verify`: JSON grid body, returns the verdict JSON
//! - `GET /healthz`: liveness

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use simcheck_core::{ResponseMap, Verifier};
use tokio::net::TcpListener;

pub fn router(verifier: Verifier) -> Router {
    Router::new()
        .route("/verify", post(verify))
        .route("/healthz", get(healthz))
        .with_state(Arc::new(verifier))
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

fn error(status: StatusCode, message: String) -> Response {
    (status, Json(json!({"error": message}))).into_response()
}

async fn verify(State(verifier): State<Arc<Verifier>>, body: Bytes) -> Response {
    let map = match ResponseMap::from_json_slice(&body) {
        Ok(map) => map,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    // scoring is CPU-bound and the assessor transport blocks
    let result = tokio::task::spawn_blocking(move || verifier.verify(&map)).await;
    match result {
        Ok(Ok(verdict)) => match serde_json::to_vec(&verdict) {
            Ok(bytes) => ([(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
            Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        },
        Ok(Err(e)) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Serves until the listener fails or the process receives Ctrl-C.
pub async fn serve(listener: TcpListener, verifier: Verifier) -> std::io::Result<()> {
    axum::serve(listener, router(verifier))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
