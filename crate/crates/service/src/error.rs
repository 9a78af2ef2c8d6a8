//! Error envelope for the REST API: JSON `{error, detail}` with a status
//! code. 400 for validation, 404 for unknown/unconfigured ports, 409 for
//! capacity and quiescence conflicts.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use histeval_core::histogram::HistogramError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: error.to_string(),
                detail: detail.into(),
            },
        }
    }

    pub fn validation(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "validation", detail)
    }

    pub fn not_found(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", detail)
    }

    pub fn capacity(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "capacity", detail)
    }

    pub fn quiescence(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "quiescence", detail)
    }

    pub fn internal(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", detail)
    }
}

impl From<HistogramError> for ApiError {
    fn from(err: HistogramError) -> Self {
        match err {
            HistogramError::CapacityExceeded { .. } => Self::capacity(err.to_string()),
            _ => Self::validation(err.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.body.error, self.body.detail)
    }
}

impl std::error::Error for ApiError {}
