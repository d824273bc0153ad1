use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use tactile_core::analysis::AnalysisError;
use tactile_core::experiment::ExperimentError;

use crate::lab::LabError;

/// Error body `{"error": CODE, "message": text}` with an HTTP status.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into() }
    }

    pub fn not_found(what: impl std::fmt::Display) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", format!("unknown {what}"))
    }

    pub fn conflict(code: &str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::CONFLICT, code, message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "VALIDATION", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}

impl From<ExperimentError> for ApiError {
    fn from(e: ExperimentError) -> Self {
        let status = match e {
            ExperimentError::DuplicateResponse(_)
            | ExperimentError::AlreadyRecorded
            | ExperimentError::Incomplete { .. }
            | ExperimentError::NoSessions
            | ExperimentError::TooFewSessions
            | ExperimentError::MissingDistinctCount(_) => StatusCode::CONFLICT,
            ExperimentError::Validation(_) | ExperimentError::NotInPlan(_) | ExperimentError::Format { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ExperimentError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Experiment(inner) => inner.into(),
            AnalysisError::Read { .. } => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.code(), e.to_string()),
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, other.code(), other.to_string()),
        }
    }
}

impl From<LabError> for ApiError {
    fn from(e: LabError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
    }
}
