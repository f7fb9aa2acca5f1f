//! Offline execution of a [`RunManifest`].

use std::fs;
use std::path::{Path, PathBuf};

use hctps_core::persist;
use hctps_core::{ExperimentRecord, FunctionId, GaConfig, LocalTarget, SubcubeFixture, SubcubeTable};

use crate::manifest::{Mode, RunManifest};
use crate::tables::{to_csv, to_markdown, TableRow, GA_VARIANT, HCTPS_VARIANT};
use crate::RunError;

pub const EXPERIMENTS_DIR: &str = "experiments";
pub const CSV_FILE: &str = "comparison.csv";
pub const MARKDOWN_FILE: &str = "comparison.md";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Files written by one `run`.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub rows: Vec<TableRow>,
    pub experiment_files: Vec<PathBuf>,
}

/// Local-phase target for a fixture row: its octant when it is one, otherwise the box itself.
pub fn fixture_target(row: &SubcubeFixture, dim: usize) -> Result<LocalTarget, RunError> {
    let fixture_err = |e: hctps_core::subcube::FixtureError| RunError::Config(e.to_string());
    Ok(match row.spec(dim).map_err(fixture_err)? {
        Some(spec) => LocalTarget::Octant { octant_index: spec.octant_index, scale_exponent: spec.scale_exponent },
        None => LocalTarget::Custom { region: row.effective_box().map_err(fixture_err)?, scale_exponent: row.scale_exponent },
    })
}

/// The local target the manifest prescribes for `fid`, if any.
pub fn local_target(manifest: &RunManifest, table: &SubcubeTable, fid: FunctionId) -> Result<Option<LocalTarget>, RunError> {
    match manifest.mode {
        Mode::GlobalOnly => Ok(None),
        Mode::HctpsFixture => {
            let row = table.get(fid).map_err(|e| RunError::Config(e.to_string()))?;
            fixture_target(row, manifest.dim).map(Some)
        }
        Mode::HctpsCustom => Ok(Some(LocalTarget::Octant {
            octant_index: manifest.octant.expect("validated"),
            scale_exponent: manifest.scale_exponent.unwrap_or(0),
        })),
    }
}

/// Runs one function's schedule: global phase, optional local phase, then freeze.
pub fn run_experiment(
    manifest: &RunManifest,
    table: &SubcubeTable,
    fid: FunctionId,
) -> Result<ExperimentRecord, RunError> {
    let config = GaConfig::default().with_seed(manifest.seed);
    let mut record =
        ExperimentRecord::new(manifest.experiment_id(fid), fid, manifest.dim, config, manifest.budget_per_dim)?;
    record.run_global(manifest.n_runs)?;
    if let Some(target) = local_target(manifest, table, fid)? {
        record.run_local(&target, manifest.n_runs)?;
    }
    record.mark_satisfied()?;
    Ok(record)
}

pub fn table_row(manifest: &RunManifest, record: &ExperimentRecord) -> Result<TableRow, RunError> {
    let report = record.report()?;
    let variants = match manifest.mode {
        Mode::GlobalOnly => vec![(GA_VARIANT, report.comparison.ga)],
        Mode::HctpsFixture | Mode::HctpsCustom => {
            vec![(HCTPS_VARIANT, report.comparison.hctps), (GA_VARIANT, report.comparison.ga)]
        }
    };
    Ok(TableRow { fid: record.fid, variants })
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

/// Executes the manifest and writes experiment files, both tables and the manifest under `out`.
pub fn cmd_run(manifest: &RunManifest, table: &SubcubeTable) -> Result<RunOutput, RunError> {
    manifest.validate()?;
    let exp_dir = manifest.out.join(EXPERIMENTS_DIR);
    fs::create_dir_all(&exp_dir).map_err(|source| RunError::Io { path: exp_dir.clone(), source })?;

    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut experiment_files = Vec::new();
    for fid in manifest.function.functions() {
        let record = run_experiment(manifest, table, fid)?;
        experiment_files.push(persist::save(&exp_dir, &record)?);
        rows.push(table_row(manifest, &record)?);
        records.push(record);
    }
    write(&manifest.out.join(CSV_FILE), &to_csv(&rows))?;
    write(&manifest.out.join(MARKDOWN_FILE), &to_markdown(&rows))?;
    write(&manifest.out.join(MANIFEST_FILE), &manifest.to_json())?;
    Ok(RunOutput { records, rows, experiment_files })
}

/// Same record with every wall-time field zeroed; the basis for replay comparisons.
pub fn without_wall_time(record: &ExperimentRecord) -> ExperimentRecord {
    let mut r = record.clone();
    for phase in &mut r.phases {
        phase.stats.wall_time_s = 0.0;
    }
    r
}
