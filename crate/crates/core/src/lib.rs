//! Two-phase, human-steered genetic algorithm search.
//!
//! A canonical binary GA first searches the whole cube `[-100, 100]^d`
//! (global phase). A decision-maker then picks subcubes, built from the octants
//! of the 3-D cube, replicated across dimensions and shrunk by `(1/2)^m`, and
//! reruns the GA inside each (local phases) until satisfied. The overall
//! answer is the best value seen in any phase.
//!
//! The numeric layers ([`benchmarks`], [`geometry`], [`subcube`], [`ga`],
//! [`stats`]) are generic over [`Scalar`] (`f32`/`f64`). Experiment records
//! and their on-disk form are `f64`.
//!
//! ```
//! use hctps_core::{ExperimentRecord, FunctionId, GaConfig, LocalTarget};
//!
//! let mut rec = ExperimentRecord::new("demo", FunctionId::F12, 3, GaConfig::default(), 50).unwrap();
//! rec.run_global(2).unwrap();
//! rec.run_local(&LocalTarget::Octant { octant_index: 1, scale_exponent: 40 }, 2).unwrap();
//! let report = rec.mark_satisfied().unwrap();
//! assert!(report.best.value <= rec.phases[0].stats.best);
//! ```

pub mod benchmarks;
pub mod experiment;
pub mod ga;
pub mod geometry;
pub mod persist;
pub mod scalar;
pub mod stats;
pub mod subcube;

pub use benchmarks::{
    budgeted_evaluate, evaluate, make_budget, make_budget_with, BenchError, EvaluationBudget, FunctionId, Objective,
    EVALS_PER_DIM,
};
pub use experiment::{
    comparison_row, execute_plan, hctps_best, run_phase, BestFound, ComparisonRow, ExperimentError,
    ExperimentRecord, ExperimentStatus, FinalReport, LocalTarget, PhaseKind, PhasePlan, PhaseResult,
};
pub use ga::{run_ga, run_ga_with, Chromosome, GaConfig, GaError, RunResult};
pub use geometry::{GeometryError, SearchBox};
pub use persist::{load, persist, PersistError};
pub use scalar::Scalar;
pub use stats::{compute_stats, RunStats, StatsError};
pub use subcube::{
    cyclic_extend, exhaustive_iteration_estimate, octant_sequence, scale_box, search_cube, subcube_for_function,
    SubcubeFixture, SubcubeSpec, SubcubeTable,
};

pub type SearchBox64 = SearchBox<f64>;
pub type SearchBox32 = SearchBox<f32>;
pub type RunResult64 = RunResult<f64>;
pub type RunStats64 = RunStats<f64>;
pub type Chromosome64 = Chromosome<f64>;
