//! JSON-over-HTTP routes.

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use hctps_core::{FinalReport, LocalTarget, SearchBox};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::session::{function_catalog, CreateExperiment, ExperimentView, FunctionInfo, JobView, OctantView, Preview, Service};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobStarted {
    pub job_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlobalRequest {
    pub n_runs: usize,
}

/// Body of `POST /experiments/{id}/local`: exactly one of `octant_index` or `box`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub octant_index: Option<usize>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub region: Option<SearchBox<f64>>,
    #[serde(default)]
    pub scale_exponent: u32,
    pub n_runs: usize,
}

impl LocalRequest {
    pub fn target(&self) -> Result<LocalTarget, ServiceError> {
        target_from(self.octant_index, self.region.clone(), self.scale_exponent)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct PreviewQuery {
    pub octant_index: usize,
    #[serde(default)]
    pub scale_exponent: u32,
}

fn target_from(
    octant_index: Option<usize>,
    region: Option<SearchBox<f64>>,
    scale_exponent: u32,
) -> Result<LocalTarget, ServiceError> {
    match (octant_index, region) {
        (Some(octant_index), None) => Ok(LocalTarget::Octant { octant_index, scale_exponent }),
        (None, Some(region)) => Ok(LocalTarget::Custom { region, scale_exponent }),
        _ => Err(ServiceError::InvalidConfig("give exactly one of `octant_index` or `box`".into())),
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload.map(|Json(v)| v).map_err(|e| ServiceError::InvalidConfig(e.body_text()))
}

pub fn router(service: Service) -> Router {
    Router::new()
        .route("/functions", get(functions))
        .route("/experiments", post(create).get(list))
        .route("/experiments/{id}", get(experiment))
        .route("/experiments/{id}/global", post(start_global))
        .route("/experiments/{id}/local", post(start_local))
        .route("/experiments/{id}/octants", get(octants))
        .route("/experiments/{id}/preview", get(preview))
        .route("/experiments/{id}/satisfied", post(satisfied))
        .route("/jobs/{job_id}", get(job))
        .with_state(service)
}

async fn functions() -> Json<Vec<FunctionInfo>> {
    Json(function_catalog())
}

async fn create(
    State(service): State<Service>,
    payload: Result<Json<CreateExperiment>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), ServiceError> {
    let id = service.create_experiment(body(payload)?)?;
    Ok((StatusCode::CREATED, Json(Created { id })))
}

async fn list(State(service): State<Service>) -> Json<Vec<String>> {
    Json(service.experiment_ids())
}

async fn experiment(State(service): State<Service>, Path(id): Path<String>) -> Result<Json<ExperimentView>, ServiceError> {
    service.experiment(&id).map(Json)
}

async fn start_global(
    State(service): State<Service>,
    Path(id): Path<String>,
    payload: Result<Json<GlobalRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<JobStarted>), ServiceError> {
    let req = body(payload)?;
    let job_id = service.start_global(&id, req.n_runs)?;
    Ok((StatusCode::ACCEPTED, Json(JobStarted { job_id })))
}

async fn start_local(
    State(service): State<Service>,
    Path(id): Path<String>,
    payload: Result<Json<LocalRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<JobStarted>), ServiceError> {
    let req = body(payload)?;
    let job_id = service.start_local(&id, &req.target()?, req.n_runs)?;
    Ok((StatusCode::ACCEPTED, Json(JobStarted { job_id })))
}

async fn octants(State(service): State<Service>, Path(id): Path<String>) -> Result<Json<Vec<OctantView>>, ServiceError> {
    service.octants(&id).map(Json)
}

async fn preview(
    State(service): State<Service>,
    Path(id): Path<String>,
    query: Result<Query<PreviewQuery>, QueryRejection>,
) -> Result<Json<Preview>, ServiceError> {
    let Query(q) = query.map_err(|e| ServiceError::InvalidConfig(e.body_text()))?;
    let target = target_from(Some(q.octant_index), None, q.scale_exponent)?;
    service.preview(&id, &target).map(Json)
}

async fn satisfied(State(service): State<Service>, Path(id): Path<String>) -> Result<Json<FinalReport>, ServiceError> {
    service.mark_satisfied(&id).map(Json)
}

async fn job(State(service): State<Service>, Path(job_id): Path<String>) -> Result<Json<JobView>, ServiceError> {
    service.job(&job_id).map(Json)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(service: Service, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(service)).await
}
