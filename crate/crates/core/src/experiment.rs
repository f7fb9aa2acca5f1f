//! Two-phase experiment control flow: one global phase over the full cube,
//! then any number of human-chosen local phases, until the decision-maker
//! declares the result satisfactory.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmarks::{make_budget_with, FunctionId, EVALS_PER_DIM};
use crate::ga::{run_ga, GaConfig, GaError, RunResult};
use crate::geometry::{GeometryError, SearchBox};
use crate::scalar::cmp_fitness;
use crate::stats::{compute_stats, RunStats, StatsError};
use crate::subcube::{search_cube, SubcubeSpec};

/// Offset between the seed bases of consecutive phases.
pub const PHASE_SEED_STRIDE: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("experiment has no completed phases")]
    NoPhases,
    #[error("the global phase has already run")]
    AlreadyRan,
    #[error("the global phase has not completed yet")]
    GlobalPending,
    #[error("experiment is frozen (marked satisfied)")]
    Frozen,
    #[error("cannot {action} while experiment is {status:?}")]
    InvalidTransition { action: &'static str, status: ExperimentStatus },
    #[error("phase ordering violated: {0}")]
    PhaseOrder(&'static str),
    #[error("region has {actual} dimensions, experiment has {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("region is not inside the search cube")]
    OutsideCube,
    #[error("comparison inputs belong to different experiments: {0}")]
    MismatchedExperiment(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentStatus {
    Running,
    AwaitingDecision,
    Satisfied,
}

/// One batch of independent GA runs over a single region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub phase: PhaseKind,
    pub region: SearchBox<f64>,
    pub subcube_spec: Option<SubcubeSpec>,
    pub seed_base: u64,
    pub runs: Vec<RunResult<f64>>,
    pub stats: RunStats<f64>,
}

impl PhaseResult {
    pub fn best_values(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.best_value).collect()
    }

    /// Index of the best run (lowest value, earliest on ties).
    pub fn best_run(&self) -> Option<usize> {
        (0..self.runs.len()).reduce(|best, i| {
            if cmp_fitness(self.runs[i].best_value, self.runs[best].best_value).is_lt() {
                i
            } else {
                best
            }
        })
    }
}

/// Everything needed to execute one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlan {
    pub kind: PhaseKind,
    pub region: SearchBox<f64>,
    pub subcube_spec: Option<SubcubeSpec>,
    pub n_runs: usize,
    pub seed_base: u64,
    pub budget_per_dim: usize,
}

/// Runs `n_runs` GA runs with the protocol budget; run `i` uses seed `config.seed + i`.
pub fn run_phase(
    fid: FunctionId,
    kind: PhaseKind,
    region: &SearchBox<f64>,
    config: &GaConfig,
    n_runs: usize,
) -> Result<PhaseResult, ExperimentError> {
    let plan = PhasePlan {
        kind,
        region: region.clone(),
        subcube_spec: None,
        n_runs,
        seed_base: config.seed,
        budget_per_dim: EVALS_PER_DIM,
    };
    execute_plan(fid, config, &plan, &|| {})
}

/// Executes a plan. Runs go to the rayon pool; `on_run_done` fires once per finished run.
/// Results are stored in run-index order regardless of completion order.
pub fn execute_plan(
    fid: FunctionId,
    config: &GaConfig,
    plan: &PhasePlan,
    on_run_done: &(dyn Fn() + Sync),
) -> Result<PhaseResult, ExperimentError> {
    if plan.n_runs == 0 {
        return Err(ExperimentError::InvalidConfig("n_runs must be at least 1".into()));
    }
    config.validate()?;
    let dim = plan.region.dim();
    let started = Instant::now();
    let runs = (0..plan.n_runs)
        .into_par_iter()
        .map(|i| {
            let cfg = config.clone().with_seed(plan.seed_base.wrapping_add(i as u64));
            let mut budget = make_budget_with(dim, plan.budget_per_dim);
            let r = run_ga(fid, &plan.region, &cfg, &mut budget);
            on_run_done();
            r
        })
        .collect::<Result<Vec<_>, _>>()?;
    let values: Vec<f64> = runs.iter().map(|r| r.best_value).collect();
    let mut stats = compute_stats(&values)?;
    stats.wall_time_s = started.elapsed().as_secs_f64();
    Ok(PhaseResult {
        phase: plan.kind,
        region: plan.region.clone(),
        subcube_spec: plan.subcube_spec,
        seed_base: plan.seed_base,
        runs,
        stats,
    })
}

/// Where a local phase searches.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalTarget {
    /// Octant of `[-100, 100]^3`, extended and scaled.
    Octant { octant_index: usize, scale_exponent: u32 },
    /// Explicit box, 3-D (cyclically extended) or full dimension, inside the search cube
    /// before scaling.
    Custom { region: SearchBox<f64>, scale_exponent: u32 },
}

/// Best value over every run of every phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestFound {
    pub value: f64,
    pub point: Vec<f64>,
    pub phase_index: usize,
    pub run_index: usize,
}

/// Side-by-side statistics for one function: the winning phase against a standalone GA batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub fid: FunctionId,
    pub dim: usize,
    pub hctps: RunStats<f64>,
    pub ga: RunStats<f64>,
    /// Phase whose stats fill the HCTPS column.
    pub winning_phase: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReport {
    pub best: BestFound,
    pub comparison: ComparisonRow,
}

/// The append-only log of one two-phase experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment_id: String,
    pub fid: FunctionId,
    pub dim: usize,
    pub ga_config: GaConfig,
    pub budget_per_dim: usize,
    pub phases: Vec<PhaseResult>,
    pub status: ExperimentStatus,
}

impl ExperimentRecord {
    pub fn new(
        experiment_id: impl Into<String>,
        fid: FunctionId,
        dim: usize,
        ga_config: GaConfig,
        budget_per_dim: usize,
    ) -> Result<Self, ExperimentError> {
        if dim < 3 {
            return Err(ExperimentError::InvalidConfig(format!(
                "dim must be at least 3 for cyclic extension, got {dim}"
            )));
        }
        ga_config.validate()?;
        if dim * budget_per_dim < ga_config.population_size {
            return Err(ExperimentError::InvalidConfig(format!(
                "budget of {} evaluations cannot cover a population of {}",
                dim * budget_per_dim,
                ga_config.population_size
            )));
        }
        Ok(Self {
            experiment_id: experiment_id.into(),
            fid,
            dim,
            ga_config,
            budget_per_dim,
            phases: Vec::new(),
            status: ExperimentStatus::Running,
        })
    }

    pub fn search_cube(&self) -> SearchBox<f64> {
        search_cube(self.dim).expect("dim >= 3")
    }

    /// Seed base for the next phase: `seed + PHASE_SEED_STRIDE * phase_index`.
    pub fn next_seed_base(&self) -> u64 {
        self.ga_config
            .seed
            .wrapping_add(PHASE_SEED_STRIDE.wrapping_mul(self.phases.len() as u64))
    }

    pub fn has_global(&self) -> bool {
        self.phases.first().is_some_and(|p| p.phase == PhaseKind::Global)
    }

    pub fn plan_global(&self, n_runs: usize) -> Result<PhasePlan, ExperimentError> {
        if self.status == ExperimentStatus::Satisfied {
            return Err(ExperimentError::Frozen);
        }
        if !self.phases.is_empty() {
            return Err(ExperimentError::AlreadyRan);
        }
        self.plan(PhaseKind::Global, self.search_cube(), None, n_runs)
    }

    pub fn plan_local(&self, target: &LocalTarget, n_runs: usize) -> Result<PhasePlan, ExperimentError> {
        if self.status == ExperimentStatus::Satisfied {
            return Err(ExperimentError::Frozen);
        }
        if !self.has_global() {
            return Err(ExperimentError::GlobalPending);
        }
        let (region, spec) = self.resolve_target(target)?;
        self.plan(PhaseKind::Local, region, spec, n_runs)
    }

    /// Region a local target maps to for this experiment.
    pub fn resolve_target(
        &self,
        target: &LocalTarget,
    ) -> Result<(SearchBox<f64>, Option<SubcubeSpec>), ExperimentError> {
        match target {
            LocalTarget::Octant { octant_index, scale_exponent } => {
                let spec = SubcubeSpec::new(*octant_index, *scale_exponent, self.dim)?;
                Ok((spec.region()?, Some(spec)))
            }
            LocalTarget::Custom { region, scale_exponent } => {
                let full = match region.dim() {
                    3 if self.dim != 3 => crate::subcube::cyclic_extend(region, self.dim)?,
                    d if d == self.dim => region.clone(),
                    d => return Err(ExperimentError::DimensionMismatch { expected: self.dim, actual: d }),
                };
                if !self.search_cube().contains_box(&full) {
                    return Err(ExperimentError::OutsideCube);
                }
                Ok((crate::subcube::scale_box(&full, *scale_exponent)?, None))
            }
        }
    }

    fn plan(
        &self,
        kind: PhaseKind,
        region: SearchBox<f64>,
        subcube_spec: Option<SubcubeSpec>,
        n_runs: usize,
    ) -> Result<PhasePlan, ExperimentError> {
        if n_runs == 0 {
            return Err(ExperimentError::InvalidConfig("n_runs must be at least 1".into()));
        }
        if region.dim() != self.dim {
            return Err(ExperimentError::DimensionMismatch { expected: self.dim, actual: region.dim() });
        }
        Ok(PhasePlan {
            kind,
            region,
            subcube_spec,
            n_runs,
            seed_base: self.next_seed_base(),
            budget_per_dim: self.budget_per_dim,
        })
    }

    /// Moves an awaiting experiment back to `running` before a local phase.
    pub fn begin_phase(&mut self) -> Result<(), ExperimentError> {
        match self.status {
            ExperimentStatus::Running if self.phases.is_empty() => Ok(()),
            ExperimentStatus::AwaitingDecision => {
                self.status = ExperimentStatus::Running;
                Ok(())
            }
            ExperimentStatus::Satisfied => Err(ExperimentError::Frozen),
            status => Err(ExperimentError::InvalidTransition { action: "begin a phase", status }),
        }
    }

    /// Appends a finished phase and hands control back to the decision-maker.
    pub fn append_phase(&mut self, result: PhaseResult) -> Result<usize, ExperimentError> {
        if self.status != ExperimentStatus::Running {
            return Err(ExperimentError::InvalidTransition { action: "append a phase", status: self.status });
        }
        match (self.phases.is_empty(), result.phase) {
            (true, PhaseKind::Local) => return Err(ExperimentError::PhaseOrder("first phase must be global")),
            (false, PhaseKind::Global) => return Err(ExperimentError::PhaseOrder("only the first phase is global")),
            _ => {}
        }
        if result.region.dim() != self.dim {
            return Err(ExperimentError::DimensionMismatch { expected: self.dim, actual: result.region.dim() });
        }
        self.phases.push(result);
        self.status = ExperimentStatus::AwaitingDecision;
        Ok(self.phases.len() - 1)
    }

    fn run_planned(&mut self, plan: PhasePlan) -> Result<usize, ExperimentError> {
        self.begin_phase()?;
        let result = execute_plan(self.fid, &self.ga_config, &plan, &|| {});
        match result {
            Ok(r) => self.append_phase(r),
            Err(e) => {
                if !self.phases.is_empty() {
                    self.status = ExperimentStatus::AwaitingDecision;
                }
                Err(e)
            }
        }
    }

    /// Plans, runs and appends the global phase.
    pub fn run_global(&mut self, n_runs: usize) -> Result<usize, ExperimentError> {
        let plan = self.plan_global(n_runs)?;
        self.run_planned(plan)
    }

    /// Plans, runs and appends one local phase.
    pub fn run_local(&mut self, target: &LocalTarget, n_runs: usize) -> Result<usize, ExperimentError> {
        let plan = self.plan_local(target, n_runs)?;
        self.run_planned(plan)
    }

    /// Freezes the record and reports the overall best plus the comparison row.
    pub fn mark_satisfied(&mut self) -> Result<FinalReport, ExperimentError> {
        let report = self.report()?;
        if self.status != ExperimentStatus::AwaitingDecision {
            return Err(ExperimentError::InvalidTransition { action: "mark satisfied", status: self.status });
        }
        self.status = ExperimentStatus::Satisfied;
        Ok(report)
    }

    /// Best-so-far and comparison against this experiment's own global phase.
    pub fn report(&self) -> Result<FinalReport, ExperimentError> {
        let best = hctps_best(self)?;
        let global = self.phases.first().ok_or(ExperimentError::NoPhases)?;
        let comparison = comparison_row(global, self.fid, self)?;
        Ok(FinalReport { best, comparison })
    }
}

/// Minimum over all runs of all phases; earliest phase, then earliest run, on ties.
pub fn hctps_best(record: &ExperimentRecord) -> Result<BestFound, ExperimentError> {
    let mut best: Option<(usize, usize)> = None;
    for (p, phase) in record.phases.iter().enumerate() {
        for (r, run) in phase.runs.iter().enumerate() {
            let better = match best {
                None => true,
                Some((bp, br)) => cmp_fitness(run.best_value, record.phases[bp].runs[br].best_value).is_lt(),
            };
            if better {
                best = Some((p, r));
            }
        }
    }
    let (phase_index, run_index) = best.ok_or(ExperimentError::NoPhases)?;
    let run = &record.phases[phase_index].runs[run_index];
    Ok(BestFound { value: run.best_value, point: run.best_point.clone(), phase_index, run_index })
}

/// Pairs the stats of the phase holding [`hctps_best`] with a standalone GA batch.
pub fn comparison_row(
    standalone: &PhaseResult,
    standalone_fid: FunctionId,
    hctps: &ExperimentRecord,
) -> Result<ComparisonRow, ExperimentError> {
    if standalone_fid != hctps.fid {
        return Err(ExperimentError::MismatchedExperiment(format!(
            "standalone ran {standalone_fid}, experiment is {}",
            hctps.fid
        )));
    }
    if standalone.region.dim() != hctps.dim {
        return Err(ExperimentError::MismatchedExperiment(format!(
            "standalone is {}-D, experiment is {}-D",
            standalone.region.dim(),
            hctps.dim
        )));
    }
    let best = hctps_best(hctps)?;
    Ok(ComparisonRow {
        fid: hctps.fid,
        dim: hctps.dim,
        hctps: hctps.phases[best.phase_index].stats.clone(),
        ga: standalone.stats.clone(),
        winning_phase: best.phase_index,
    })
}
