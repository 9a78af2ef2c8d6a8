//! HTTP surface: one histogram resource per RX port.
//!
//! ```text
//! PUT    /api/histogram/{port}   configure (body: {min_ns, max_ns, num_bins})
//! GET    /api/histogram/{port}   latest aggregated statistics
//! DELETE /api/histogram/{port}   drop configuration and counters
//! GET    /api/ports              registered ports and capacity
//! ```

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, put};
use axum::{Json, Router};

use histeval_core::histogram::HistogramConfig;
use histeval_core::report::StatsDocument;

use crate::error::ApiError;
use crate::state::{AppState, ConfigureResponse, PortsResponse};

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route(
            "/api/histogram/{port}",
            put(configure).get(stats).delete(delete),
        )
        .route("/api/ports", get(ports))
        .with_state(state)
}

async fn configure(
    State(state): State<Arc<AppState>>,
    Path(port): Path<u16>,
    Json(config): Json<HistogramConfig>,
) -> Result<Json<ConfigureResponse>, ApiError> {
    state.configure(port, config).map(Json)
}

async fn stats(
    State(state): State<Arc<AppState>>,
    Path(port): Path<u16>,
) -> Result<Json<StatsDocument>, ApiError> {
    state.stats(port).map(Json)
}

async fn delete(
    State(state): State<Arc<AppState>>,
    Path(port): Path<u16>,
) -> Result<StatusCode, ApiError> {
    state.delete(port)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn ports(State(state): State<Arc<AppState>>) -> Json<PortsResponse> {
    Json(state.ports())
}
