// SPDX-License-Identifier: Apache-2.0

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use domainhub_core::Error;
use domainhub_relay::RelayError;

use crate::dto::ErrorBody;

/// Error response: `{"error": <code>, "message": <text>}` with a status
/// derived from the error class.
#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = StatusCode::from_u16(e.class().status()).unwrap_or(StatusCode::CONFLICT);
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<RelayError> for ApiError {
    fn from(e: RelayError) -> Self {
        let status = match &e {
            RelayError::AgentOffline => StatusCode::SERVICE_UNAVAILABLE,
            RelayError::RemotePathRejected(_) => StatusCode::BAD_REQUEST,
            RelayError::ListTimeout | RelayError::TransferTimeout { .. } => {
                StatusCode::GATEWAY_TIMEOUT
            }
            RelayError::Remote { code, .. } => match code.as_str() {
                "NotFound" | "NoSuchShare" => StatusCode::NOT_FOUND,
                "NotAFile" | "NotADirectory" => StatusCode::BAD_REQUEST,
                _ => StatusCode::BAD_GATEWAY,
            },
            _ => StatusCode::BAD_GATEWAY,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code,
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
