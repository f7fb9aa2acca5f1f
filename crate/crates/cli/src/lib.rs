//! Headless driver for two-phase GA experiments: scripted schedules, comparison
//! tables and the verification suite behind `hctps verify`.

use std::path::PathBuf;

use hctps_core::{ExperimentError, PersistError};
use thiserror::Error;

pub mod manifest;
pub mod run;
pub mod tables;
pub mod verify;

pub use manifest::{FunctionSelection, Mode, RunManifest};
pub use run::{cmd_run, RunOutput};
pub use verify::{verify, Criterion, VerifyOptions};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Persist(#[from] PersistError),
}

impl RunError {
    /// 2 for configuration problems, 3 for storage problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Experiment(_) => 2,
            RunError::Io { .. } | RunError::Persist(_) => 3,
        }
    }
}
