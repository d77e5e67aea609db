//! Response envelope and error mapping.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use kdecl::pipeline::PipelineError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

/// `{ok, data, error, sessionVersion}`; exactly one of `data` and `error` is
/// set except for committed failures, which carry both.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Envelope<T: Serialize> {
    pub ok: bool,
    pub data: Option<T>,
    pub error: Option<ErrorBody>,
    pub session_version: Option<u64>,
}

pub fn ok<T: Serialize>(status: StatusCode, data: T, version: Option<u64>) -> Response {
    let body = Envelope {
        ok: true,
        data: Some(data),
        error: None,
        session_version: version,
    };
    (status, Json(body)).into_response()
}

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("missing or wrong bearer token")]
    Unauthorized,
    #[error("session is at version {current}, request expected {expected}")]
    VersionConflict { expected: u64, current: u64 },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("the session has no graph yet")]
    NoGraph,
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Unauthorized => StatusCode::UNAUTHORIZED,
            ApiError::VersionConflict { .. } => StatusCode::CONFLICT,
            ApiError::Pipeline(e) => match e {
                PipelineError::StaleEdit { .. } => StatusCode::CONFLICT,
                PipelineError::Llm(_) => StatusCode::BAD_GATEWAY,
                PipelineError::Template(_) | PipelineError::Embed(_) => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::UNPROCESSABLE_ENTITY,
            },
            ApiError::NoGraph => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ApiError::NotFound(_) => "not_found",
            ApiError::BadRequest(_) => "bad_request",
            ApiError::Unauthorized => "unauthorized",
            ApiError::VersionConflict { .. } => "version_conflict",
            ApiError::Pipeline(e) => match e {
                PipelineError::InvalidInfo(_) => "invalid_info",
                PipelineError::StagePrecondition { .. } => "stage_precondition",
                PipelineError::NotGenerative { .. } => "not_generative",
                PipelineError::StaleEdit { .. } => "stale_edit",
                PipelineError::InvalidEdit(_) => "invalid_edit",
                PipelineError::MaxIterationsExceeded { .. } => "max_iterations_exceeded",
                PipelineError::Llm(_) => "backend_error",
                PipelineError::Template(_) => "template_error",
                PipelineError::Embed(_) => "embed_error",
            },
            ApiError::NoGraph => "no_graph",
            ApiError::Internal(_) => "internal",
        }
    }

    /// Error response that may still carry the committed session.
    pub fn with_data<T: Serialize>(self, data: Option<T>, version: Option<u64>) -> Response {
        let body = Envelope {
            ok: false,
            data,
            error: Some(ErrorBody {
                code: self.code(),
                message: self.to_string(),
            }),
            session_version: version,
        };
        (self.status(), Json(body)).into_response()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        self.with_data::<()>(None, None)
    }
}
