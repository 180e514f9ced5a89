//! The HTTP inference endpoint.

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use featherpipe_runtime::{ExecutablePlan, RowMode};
use serde_json::{json, Value as JsonValue};
use tokio::net::TcpListener;

struct AppState {
    plan: ExecutablePlan,
    mode: RowMode,
}

/// Runs a `{"rows": [...]}` request body through `plan`.
///
/// Successful rows come back in request order; failed rows are listed in
/// `errors` by index. Returns 400 for a malformed body, 422 when rows were
/// sent and none succeeded, 200 otherwise.
pub fn transform_body(plan: &ExecutablePlan, mode: RowMode, body: &[u8]) -> (u16, JsonValue) {
    let doc: JsonValue = match serde_json::from_slice(body) {
        Ok(doc) => doc,
        Err(e) => return (400, json!({"error": format!("malformed request body: {e}")})),
    };
    let Some(rows) = doc.get("rows").and_then(JsonValue::as_array) else {
        return (400, json!({"error": "request body must be an object with a `rows` array"}));
    };
    let mut out = Vec::with_capacity(rows.len());
    let mut errors = Vec::new();
    for (index, row) in rows.iter().enumerate() {
        match plan.execute_json(row, mode) {
            Ok(v) => out.push(v),
            Err(e) => errors.push(json!({"index": index, "message": e.to_string()})),
        }
    }
    let status = if !rows.is_empty() && out.is_empty() { 422 } else { 200 };
    (status, json!({"rows": out, "errors": errors}))
}

async fn transform(State(state): State<Arc<AppState>>, body: Bytes) -> (StatusCode, Json<JsonValue>) {
    let result = tokio::task::spawn_blocking(move || transform_body(&state.plan, state.mode, &body)).await;
    match result {
        Ok((status, doc)) => (StatusCode::from_u16(status).expect("valid status"), Json(doc)),
        Err(e) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({"error": format!("worker failed: {e}")})),
        ),
    }
}

async fn healthz() -> Json<JsonValue> {
    Json(json!({"status": "ok"}))
}

/// `POST /v1/transform` and `GET /healthz` over one shared plan.
pub fn router(plan: ExecutablePlan, mode: RowMode) -> Router {
    Router::new()
        .route("/v1/transform", post(transform))
        .route("/healthz", get(healthz))
        .with_state(Arc::new(AppState { plan, mode }))
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: TcpListener,
    plan: ExecutablePlan,
    mode: RowMode,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(plan, mode))
        .with_graceful_shutdown(shutdown)
        .await
}
