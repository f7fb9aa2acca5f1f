//! A scripted CLI schedule and the same request sequence against the service
//! produce the same phases.

use hctps_cli::run::{cmd_run, local_target, without_wall_time};
use hctps_cli::{FunctionSelection, Mode, RunManifest};
use hctps_core::{ExperimentRecord, FunctionId, GaConfig, SubcubeTable};
use hctps_service::{CreateExperiment, JobState, Service};

fn via_service(manifest: &RunManifest, table: &SubcubeTable, fid: FunctionId) -> ExperimentRecord {
    let service = Service::in_memory();
    let id = service
        .create_experiment(CreateExperiment {
            fid,
            dim: manifest.dim,
            config: Some(GaConfig::default().with_seed(manifest.seed)),
            budget_per_dim: Some(manifest.budget_per_dim),
        })
        .unwrap();
    let job = service.start_global(&id, manifest.n_runs).unwrap();
    assert_eq!(service.wait_job(&job).unwrap().state, JobState::Succeeded);
    if let Some(target) = local_target(manifest, table, fid).unwrap() {
        let job = service.start_local(&id, &target, manifest.n_runs).unwrap();
        assert_eq!(service.wait_job(&job).unwrap().state, JobState::Succeeded);
    }
    service.mark_satisfied(&id).unwrap();
    service.record(&id).unwrap()
}

fn check(mode: Mode, octant: Option<usize>, scale_exponent: Option<u32>) {
    let dir = tempfile::tempdir().unwrap();
    let table = SubcubeTable::builtin();
    let manifest = RunManifest {
        function: FunctionSelection::All,
        dim: 30,
        n_runs: 3,
        seed: 11,
        budget_per_dim: 50,
        mode,
        octant,
        scale_exponent,
        out: dir.path().to_path_buf(),
    };
    let output = cmd_run(&manifest, &table).unwrap();
    for cli in &output.records {
        let mut served = via_service(&manifest, &table, cli.fid);
        served.experiment_id = cli.experiment_id.clone();
        assert_eq!(without_wall_time(&served), without_wall_time(cli), "{} {mode:?}", cli.fid);
        let a = served.report().unwrap();
        let b = cli.report().unwrap();
        assert_eq!(a.best, b.best);
        assert!(a.comparison.hctps.same_values(&b.comparison.hctps));
        assert!(a.comparison.ga.same_values(&b.comparison.ga));
    }
}

#[test]
fn fixture_schedule_matches_service() {
    check(Mode::HctpsFixture, None, None);
}

#[test]
fn custom_schedule_matches_service() {
    check(Mode::HctpsCustom, Some(3), Some(12));
}

#[test]
fn global_only_matches_service() {
    check(Mode::GlobalOnly, None, None);
}
