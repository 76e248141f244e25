use a4f_core::lang::Position;
use a4f_repo::RepoError;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

/// The body of every failed request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
    /// Set when a failed execution was still recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.to_string(),
                message: message.into(),
                position: None,
                model_id: None,
            },
        }
    }

    pub fn at(mut self, position: Option<Position>) -> Self {
        self.body.position = position;
        self
    }

    pub fn recorded_as(mut self, id: String) -> Self {
        self.body.model_id = Some(id);
        self
    }

    pub fn not_found() -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such token")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<RepoError> for ApiError {
    fn from(e: RepoError) -> Self {
        let message = e.to_string();
        match e {
            RepoError::Parse(p) => ApiError::new(StatusCode::BAD_REQUEST, "parse_error", message).at(p.position()),
            RepoError::CodeTooLarge { .. } => ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "code_too_large", message),
            RepoError::NotFound => ApiError::not_found(),
            RepoError::Forbidden => ApiError::new(StatusCode::FORBIDDEN, "forbidden", message),
            RepoError::ParentMismatch(_) => ApiError::new(StatusCode::BAD_REQUEST, "bad_parent", message),
            RepoError::Theme(_) => ApiError::new(StatusCode::BAD_REQUEST, "bad_theme", message),
            RepoError::BadInstance(_) => ApiError::new(StatusCode::BAD_REQUEST, "bad_instance", message),
            RepoError::BadLayout(_) => ApiError::new(StatusCode::BAD_REQUEST, "bad_layout", message),
            RepoError::Store(_) | RepoError::Unavailable => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "store_error", message)
            }
        }
    }
}
