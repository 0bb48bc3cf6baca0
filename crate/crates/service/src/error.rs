use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use deid_core::pipeline::PipelineError;
use serde::Serialize;

use crate::persist::PersistError;
use crate::state::ReviewError;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    Validation(String, Vec<String>),
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("unauthorized")]
    Unauthorized,
    #[error("detector unavailable: {message}")]
    Unavailable { message: String, retry_after: u64 },
    #[error("detector failed: {0}")]
    BadGateway(String),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("{0}")]
    Internal(String),
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    details: &'a [String],
}

impl ApiError {
    pub fn validation(msg: impl Into<String>) -> Self {
        ApiError::Validation(msg.into(), Vec::new())
    }

    pub fn from_pipeline(e: PipelineError, retry_after: u64) -> Self {
        match e {
            PipelineError::Detect(d) if d.is_transport() => ApiError::Unavailable {
                message: d.to_string(),
                retry_after,
            },
            PipelineError::Detect(d) => ApiError::BadGateway(d.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }

    fn code(&self) -> (StatusCode, &'static str) {
        match self {
            ApiError::Validation(..) => (StatusCode::UNPROCESSABLE_ENTITY, "validation"),
            ApiError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            ApiError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            ApiError::Unauthorized => (StatusCode::UNAUTHORIZED, "unauthorized"),
            ApiError::Unavailable { .. } => (StatusCode::SERVICE_UNAVAILABLE, "detector_unavailable"),
            ApiError::BadGateway(_) => (StatusCode::BAD_GATEWAY, "detector_error"),
            ApiError::Persist(_) | ApiError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        }
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        match e {
            ReviewError::Anonymized | ReviewError::Stale { .. } | ReviewError::Purged => ApiError::Conflict(e.to_string()),
            ReviewError::Invalid(details) => ApiError::Validation("invalid spans".into(), details),
            other => ApiError::validation(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.code();
        let details: &[String] = match &self {
            ApiError::Validation(_, d) => d,
            _ => &[],
        };
        let message = match &self {
            ApiError::Validation(m, _) => m.clone(),
            other => other.to_string(),
        };
        let mut resp = (status, Json(Body { error: code, message, details })).into_response();
        if let ApiError::Unavailable { retry_after, .. } = self {
            resp.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from(retry_after));
        }
        resp
    }
}
