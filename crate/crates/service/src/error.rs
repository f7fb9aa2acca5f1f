use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use hctps_core::{ExperimentError, ExperimentStatus, GeometryError, PersistError};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("unknown job `{0}`")]
    UnknownJob(String),
    #[error("invalid request: {0}")]
    InvalidConfig(String),
    #[error("the global phase has already run")]
    AlreadyRan,
    #[error("the global phase has not completed yet")]
    GlobalPending,
    #[error("one job per experiment: job `{0}` is still running")]
    JobInFlight(String),
    #[error("experiment is frozen (marked satisfied)")]
    Frozen,
    #[error("degenerate box: {0}")]
    DegenerateBox(String),
    #[error("experiment has no completed phases")]
    NoPhases,
    #[error("storage error: {0}")]
    Storage(#[from] PersistError),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownExperiment(_) => "unknown_experiment",
            ServiceError::UnknownJob(_) => "unknown_job",
            ServiceError::InvalidConfig(_) => "invalid_config",
            ServiceError::AlreadyRan => "already_ran",
            ServiceError::GlobalPending => "global_pending",
            ServiceError::JobInFlight(_) => "job_in_flight",
            ServiceError::Frozen => "frozen",
            ServiceError::DegenerateBox(_) => "degenerate_box",
            ServiceError::NoPhases => "no_phases",
            ServiceError::Storage(_) => "storage",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownExperiment(_) | ServiceError::UnknownJob(_) => StatusCode::NOT_FOUND,
            ServiceError::InvalidConfig(_) => StatusCode::BAD_REQUEST,
            ServiceError::DegenerateBox(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::AlreadyRan
            | ServiceError::GlobalPending
            | ServiceError::JobInFlight(_)
            | ServiceError::Frozen
            | ServiceError::NoPhases => StatusCode::CONFLICT,
        }
    }
}

impl From<ExperimentError> for ServiceError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Geometry(GeometryError::DegenerateBox(i)) => {
                ServiceError::DegenerateBox(format!("zero width in dimension {i}"))
            }
            ExperimentError::AlreadyRan => ServiceError::AlreadyRan,
            ExperimentError::GlobalPending => ServiceError::GlobalPending,
            ExperimentError::Frozen
            | ExperimentError::InvalidTransition { status: ExperimentStatus::Satisfied, .. } => ServiceError::Frozen,
            ExperimentError::NoPhases => ServiceError::NoPhases,
            other => ServiceError::InvalidConfig(other.to_string()),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = Json(json!({ "error": self.code(), "message": self.to_string() }));
        (self.status(), body).into_response()
    }
}
