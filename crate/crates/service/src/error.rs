use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use phasefold_core::grid::CacheError;
use phasefold_core::ingest::IngestError;
use phasefold_core::Error as CoreError;
use serde::Serialize;

/// An error rendered as `{"error": ..., "line": ...}` with a status code.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub line: Option<u64>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<u64>,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            line: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown dataset `{id}`"))
    }

    pub fn not_ready(id: &str) -> Self {
        Self::new(
            StatusCode::CONFLICT,
            format!("dataset `{id}` is still being precomputed"),
        )
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            error: &self.message,
            line: self.line,
        };
        (self.status, Json(body)).into_response()
    }
}

/// Request-parameter errors from the analysis code.
impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

/// Upload errors; schema and content problems are 422.
impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let message = e.to_string();
        match e {
            IngestError::NotFound(id) => ApiError::not_found(&id),
            IngestError::Row { line, .. } => ApiError {
                line: Some(line),
                ..ApiError::unprocessable(message)
            },
            IngestError::Io { .. } => ApiError::internal(message),
            IngestError::Csv(ref inner) => ApiError {
                line: inner.position().map(|p| p.line()),
                ..ApiError::unprocessable(message)
            },
            _ => ApiError::unprocessable(message),
        }
    }
}

impl From<CacheError> for ApiError {
    fn from(e: CacheError) -> Self {
        ApiError::internal(e.to_string())
    }
}
