//! In-process experiment store and job runner behind the HTTP layer.
//!
//! All mutations of a record happen under one lock; phase batches run on
//! their own OS thread (which fans out to the rayon pool), so request
//! handlers never block on a GA run.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};

use hctps_core::persist::{self, FILE_SUFFIX};
use hctps_core::subcube::octant_sequence;
use hctps_core::{
    execute_plan, search_cube, ExperimentRecord, ExperimentStatus, FinalReport, FunctionId, GaConfig, LocalTarget,
    PhaseKind, PhasePlan, RunStats, SearchBox, SubcubeSpec, SubcubeTable, EVALS_PER_DIM,
};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateExperiment {
    pub fid: FunctionId,
    pub dim: usize,
    #[serde(default)]
    pub config: Option<GaConfig>,
    #[serde(default)]
    pub budget_per_dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Running,
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobView {
    pub job_id: String,
    pub experiment_id: String,
    pub kind: PhaseKind,
    pub completed: usize,
    pub total: usize,
    pub state: JobState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The stored record plus what the UI needs without computing anything itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentView {
    #[serde(flatten)]
    pub record: ExperimentRecord,
    pub search_cube: SearchBox<f64>,
    pub report: Option<FinalReport>,
    pub active_job: Option<JobView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctantPhase {
    pub phase_index: usize,
    pub scale_exponent: u32,
    pub stats: RunStats<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctantView {
    pub octant_index: usize,
    pub octant: SearchBox<f64>,
    /// Local phases run on this octant, in phase order.
    pub phases: Vec<OctantPhase>,
    pub best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preview {
    pub subcube_spec: Option<SubcubeSpec>,
    pub region: SearchBox<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionInfo {
    pub id: FunctionId,
    pub name: String,
    pub optimum_coordinate: f64,
    pub fixture_octant: SearchBox<f64>,
    pub fixture_scale_exponent: u32,
}

/// Catalogue of the benchmark functions with their fixture subcubes.
pub fn function_catalog() -> Vec<FunctionInfo> {
    let table = SubcubeTable::builtin();
    FunctionId::ALL
        .iter()
        .map(|&fid| {
            let row = table.get(fid).expect("builtin table covers every function");
            FunctionInfo {
                id: fid,
                name: fid.name().to_string(),
                optimum_coordinate: fid.optimum_coordinate(),
                fixture_octant: row.printed_box().expect("builtin fixture parses"),
                fixture_scale_exponent: row.scale_exponent,
            }
        })
        .collect()
}

#[derive(Debug)]
struct Outcome {
    state: JobState,
    phase_index: Option<usize>,
    error: Option<String>,
}

#[derive(Debug)]
struct Job {
    experiment_id: String,
    kind: PhaseKind,
    total: usize,
    completed: AtomicUsize,
    outcome: Mutex<Outcome>,
    done: Condvar,
}

impl Job {
    fn view(&self, job_id: &str) -> JobView {
        let outcome = self.outcome.lock().expect("job lock");
        JobView {
            job_id: job_id.to_string(),
            experiment_id: self.experiment_id.clone(),
            kind: self.kind,
            completed: self.completed.load(Ordering::SeqCst),
            total: self.total,
            state: outcome.state,
            phase_index: outcome.phase_index,
            error: outcome.error.clone(),
        }
    }

    fn finish(&self, state: JobState, phase_index: Option<usize>, error: Option<String>) {
        let mut outcome = self.outcome.lock().expect("job lock");
        *outcome = Outcome { state, phase_index, error };
        self.done.notify_all();
    }
}

#[derive(Default)]
struct Session {
    experiments: HashMap<String, ExperimentRecord>,
    jobs: HashMap<String, Arc<Job>>,
    /// experiment id -> job id of its in-flight job
    active: HashMap<String, String>,
}

struct Inner {
    session: Mutex<Session>,
    store: Option<PathBuf>,
}

/// Shared handle to the experiment store; cheap to clone.
#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

impl Service {
    /// A service that keeps records in memory only.
    pub fn in_memory() -> Self {
        Self { inner: Arc::new(Inner { session: Mutex::new(Session::default()), store: None }) }
    }

    /// A service persisting every record under `dir`, reloading any records found there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| persist::PersistError::Io { path: dir.clone(), source })?;
        let mut session = Session::default();
        let entries = fs::read_dir(&dir).map_err(|source| persist::PersistError::Io { path: dir.clone(), source })?;
        for entry in entries {
            let path = entry.map_err(|source| persist::PersistError::Io { path: dir.clone(), source })?.path();
            let is_record = path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(FILE_SUFFIX));
            if !is_record {
                continue;
            }
            let record = persist::load_file(&path)?;
            tracing::debug!(id = %record.experiment_id, "loaded experiment");
            session.experiments.insert(record.experiment_id.clone(), record);
        }
        Ok(Self { inner: Arc::new(Inner { session: Mutex::new(session), store: Some(dir) }) })
    }

    pub fn store(&self) -> Option<&Path> {
        self.inner.store.as_deref()
    }

    fn lock(&self) -> MutexGuard<'_, Session> {
        self.inner.session.lock().expect("session lock poisoned")
    }

    fn save(&self, record: &ExperimentRecord) -> Result<(), ServiceError> {
        if let Some(dir) = &self.inner.store {
            persist::save(dir, record)?;
        }
        Ok(())
    }

    pub fn create_experiment(&self, req: CreateExperiment) -> Result<String, ServiceError> {
        let id = uuid::Uuid::new_v4().to_string();
        let record = ExperimentRecord::new(
            id.clone(),
            req.fid,
            req.dim,
            req.config.unwrap_or_default(),
            req.budget_per_dim.unwrap_or(EVALS_PER_DIM),
        )?;
        self.save(&record)?;
        self.lock().experiments.insert(id.clone(), record);
        Ok(id)
    }

    pub fn experiment_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.lock().experiments.keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn record(&self, id: &str) -> Result<ExperimentRecord, ServiceError> {
        self.lock().experiments.get(id).cloned().ok_or_else(|| ServiceError::UnknownExperiment(id.to_string()))
    }

    pub fn experiment(&self, id: &str) -> Result<ExperimentView, ServiceError> {
        let session = self.lock();
        let record = session.experiments.get(id).ok_or_else(|| ServiceError::UnknownExperiment(id.to_string()))?;
        let active_job = session.active.get(id).map(|job_id| session.jobs[job_id].view(job_id));
        Ok(ExperimentView {
            record: record.clone(),
            search_cube: record.search_cube(),
            report: record.report().ok(),
            active_job,
        })
    }

    pub fn start_global(&self, id: &str, n_runs: usize) -> Result<String, ServiceError> {
        let mut session = self.lock();
        let record = session.experiments.get(id).ok_or_else(|| ServiceError::UnknownExperiment(id.to_string()))?;
        let plan = record.plan_global(n_runs)?;
        if let Some(job_id) = session.active.get(id) {
            // a global job in flight means the global phase is already taken
            return Err(match session.jobs[job_id].kind {
                PhaseKind::Global => ServiceError::AlreadyRan,
                PhaseKind::Local => ServiceError::JobInFlight(job_id.clone()),
            });
        }
        self.launch(&mut session, id, plan)
    }

    pub fn start_local(&self, id: &str, target: &LocalTarget, n_runs: usize) -> Result<String, ServiceError> {
        let mut session = self.lock();
        let record = session.experiments.get(id).ok_or_else(|| ServiceError::UnknownExperiment(id.to_string()))?;
        let plan = record.plan_local(target, n_runs)?;
        if let Some(job_id) = session.active.get(id) {
            return Err(ServiceError::JobInFlight(job_id.clone()));
        }
        self.launch(&mut session, id, plan)
    }

    fn launch(&self, session: &mut Session, id: &str, plan: PhasePlan) -> Result<String, ServiceError> {
        let record = session.experiments.get_mut(id).expect("checked by caller");
        record.begin_phase()?;
        let fid = record.fid;
        let config = record.ga_config.clone();
        let job_id = uuid::Uuid::new_v4().to_string();
        let job = Arc::new(Job {
            experiment_id: id.to_string(),
            kind: plan.kind,
            total: plan.n_runs,
            completed: AtomicUsize::new(0),
            outcome: Mutex::new(Outcome { state: JobState::Running, phase_index: None, error: None }),
            done: Condvar::new(),
        });
        session.jobs.insert(job_id.clone(), Arc::clone(&job));
        session.active.insert(id.to_string(), job_id.clone());
        tracing::info!(experiment = id, job = %job_id, kind = ?plan.kind, runs = plan.n_runs, "job started");

        let service = self.clone();
        let jid = job_id.clone();
        std::thread::spawn(move || {
            let result = execute_plan(fid, &config, &plan, &|| {
                job.completed.fetch_add(1, Ordering::SeqCst);
            });
            service.complete(&jid, &job, result);
        });
        Ok(job_id)
    }

    fn complete(
        &self,
        job_id: &str,
        job: &Job,
        result: Result<hctps_core::PhaseResult, hctps_core::ExperimentError>,
    ) {
        let mut session = self.lock();
        let id = job.experiment_id.clone();
        session.active.remove(&id);
        let record = session.experiments.get_mut(&id).expect("jobs never outlive their experiment");
        let appended = result.map_err(ServiceError::from).and_then(|phase| {
            let mut next = record.clone();
            let index = next.append_phase(phase)?;
            self.save(&next)?;
            *record = next;
            Ok(index)
        });
        match appended {
            Ok(index) => {
                tracing::info!(experiment = %id, job = job_id, phase = index, "job finished");
                job.finish(JobState::Succeeded, Some(index), None);
            }
            Err(e) => {
                tracing::warn!(experiment = %id, job = job_id, error = %e, "job failed");
                if !record.phases.is_empty() {
                    record.status = ExperimentStatus::AwaitingDecision;
                }
                job.finish(JobState::Failed, None, Some(e.to_string()));
            }
        }
    }

    pub fn job(&self, job_id: &str) -> Result<JobView, ServiceError> {
        let job = self.lock().jobs.get(job_id).cloned().ok_or_else(|| ServiceError::UnknownJob(job_id.to_string()))?;
        Ok(job.view(job_id))
    }

    /// Blocks the calling thread until the job leaves the running state.
    pub fn wait_job(&self, job_id: &str) -> Result<JobView, ServiceError> {
        let job = self.lock().jobs.get(job_id).cloned().ok_or_else(|| ServiceError::UnknownJob(job_id.to_string()))?;
        let outcome = job.outcome.lock().expect("job lock");
        drop(job.done.wait_while(outcome, |o| o.state == JobState::Running).expect("job lock"));
        // finish() runs under the session lock, so later reads see the appended phase
        Ok(job.view(job_id))
    }

    pub fn octants(&self, id: &str) -> Result<Vec<OctantView>, ServiceError> {
        let record = self.record(id)?;
        if !record.has_global() {
            return Err(ServiceError::GlobalPending);
        }
        let octants = octant_sequence(&search_cube::<f64>(3).expect("3-D cube"))
            .map_err(|e| ServiceError::InvalidConfig(e.to_string()))?;
        Ok(octants
            .into_iter()
            .enumerate()
            .map(|(i, octant)| {
                let phases: Vec<OctantPhase> = record
                    .phases
                    .iter()
                    .enumerate()
                    .filter_map(|(p, phase)| {
                        let spec = phase.subcube_spec?;
                        (spec.octant_index == i + 1).then(|| OctantPhase {
                            phase_index: p,
                            scale_exponent: spec.scale_exponent,
                            stats: phase.stats.clone(),
                        })
                    })
                    .collect();
                let best = phases.iter().map(|p| p.stats.best).reduce(f64::min);
                OctantView { octant_index: i + 1, octant, phases, best }
            })
            .collect())
    }

    /// Region a local phase would search, without scheduling anything.
    pub fn preview(&self, id: &str, target: &LocalTarget) -> Result<Preview, ServiceError> {
        let record = self.record(id)?;
        let (region, subcube_spec) = record.resolve_target(target)?;
        Ok(Preview { subcube_spec, region })
    }

    pub fn mark_satisfied(&self, id: &str) -> Result<FinalReport, ServiceError> {
        let mut session = self.lock();
        if let Some(job_id) = session.active.get(id) {
            return Err(ServiceError::JobInFlight(job_id.clone()));
        }
        let record = session.experiments.get_mut(id).ok_or_else(|| ServiceError::UnknownExperiment(id.to_string()))?;
        let mut next = record.clone();
        let report = next.mark_satisfied()?;
        self.save(&next)?;
        *record = next;
        tracing::info!(experiment = id, best = report.best.value, "experiment satisfied");
        Ok(report)
    }
}
