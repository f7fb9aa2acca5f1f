//! HTTP service for steering two-phase GA experiments.
//!
//! Phases run as background jobs that clients poll through `GET /jobs/{job_id}`.
//! Each experiment allows one job at a time. With a store directory every
//! change is written to `<dir>/<id>.hctps.jsonl`, and records found there are
//! reloaded on startup.

mod error;
mod http;
mod session;

pub use error::ServiceError;
pub use http::{router, serve, Created, GlobalRequest, JobStarted, LocalRequest};
pub use session::{
    function_catalog, CreateExperiment, ExperimentView, FunctionInfo, JobState, JobView, OctantPhase, OctantView,
    Preview, Service,
};
