use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use curatr_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(skip)]
    status: u16,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            code: code.to_owned(),
            message: message.into(),
            details: None,
            status: status.as_u16(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "VALIDATION", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NOT_FOUND", message)
    }

    pub fn not_ready(components: Value) -> Self {
        let mut e = Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "NOT_READY",
            "engine is still loading",
        );
        e.details = Some(components);
        e
    }

    pub fn status(&self) -> StatusCode {
        StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::Validation(_)
            | Error::EmptyVocabulary { .. }
            | Error::Diverged { .. }
            | Error::Parse { .. } => StatusCode::BAD_REQUEST,
            Error::OutOfVocabulary { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Conflict { .. } | Error::VersionConflict { .. } => StatusCode::CONFLICT,
            Error::NotFound { .. } => StatusCode::NOT_FOUND,
            Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let details = match &err {
            Error::OutOfVocabulary { terms } => Some(json!({ "terms": terms })),
            Error::VersionConflict {
                expected, current, ..
            } => Some(json!({ "expected": expected, "current": current })),
            _ => None,
        };
        ApiError {
            code: err.code().to_owned(),
            message: err.to_string(),
            details,
            status: status.as_u16(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}
