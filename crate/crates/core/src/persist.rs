//! Line-delimited experiment files (`<id>.hctps.jsonl`).
//!
//! Layout: one header line, one line per phase in order, and a trailing
//! `{"sha256": "<hex>"}` line covering every preceding byte. Floats are
//! written in shortest round-trip form so a load reproduces the record
//! bit for bit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::benchmarks::FunctionId;
use crate::experiment::{ExperimentRecord, ExperimentStatus, PhaseKind, PhaseResult};
use crate::ga::GaConfig;

pub const SCHEMA: &str = "hctps-experiment";
pub const SCHEMA_VERSION: u32 = 1;
pub const FILE_SUFFIX: &str = ".hctps.jsonl";

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("corrupt experiment record: {0}")]
    CorruptRecord(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn corrupt(msg: impl Into<String>) -> PersistError {
    PersistError::CorruptRecord(msg.into())
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    version: u32,
    experiment_id: String,
    fid: FunctionId,
    dim: usize,
    budget_per_dim: usize,
    status: ExperimentStatus,
    ga_config: GaConfig,
    n_phases: usize,
}

#[derive(Serialize, Deserialize)]
struct PhaseLine {
    phase_index: usize,
    #[serde(flatten)]
    result: PhaseResult,
}

#[derive(Serialize, Deserialize)]
struct Footer {
    sha256: String,
}

fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Serialises a record to its file form.
pub fn persist(record: &ExperimentRecord) -> String {
    let header = Header {
        schema: SCHEMA.to_string(),
        version: SCHEMA_VERSION,
        experiment_id: record.experiment_id.clone(),
        fid: record.fid,
        dim: record.dim,
        budget_per_dim: record.budget_per_dim,
        status: record.status,
        ga_config: record.ga_config.clone(),
        n_phases: record.phases.len(),
    };
    let mut body = serde_json::to_string(&header).expect("header serialises");
    body.push('\n');
    for (phase_index, result) in record.phases.iter().enumerate() {
        let line = PhaseLine { phase_index, result: result.clone() };
        body.push_str(&serde_json::to_string(&line).expect("phase serialises"));
        body.push('\n');
    }
    let footer = Footer { sha256: digest_hex(body.as_bytes()) };
    body.push_str(&serde_json::to_string(&footer).expect("footer serialises"));
    body.push('\n');
    body
}

/// Parses and verifies a record written by [`persist`].
pub fn load(text: &str) -> Result<ExperimentRecord, PersistError> {
    let trimmed = text.strip_suffix('\n').ok_or_else(|| corrupt("missing final newline"))?;
    let (body_end, footer_line) = match trimmed.rfind('\n') {
        Some(i) => (i + 1, &trimmed[i + 1..]),
        None => return Err(corrupt("missing checksum line")),
    };
    let footer: Footer =
        serde_json::from_str(footer_line).map_err(|e| corrupt(format!("checksum line: {e}")))?;
    let body = &text[..body_end];
    if digest_hex(body.as_bytes()) != footer.sha256 {
        return Err(corrupt("checksum mismatch"));
    }

    let mut lines = body.lines();
    let header: Header = serde_json::from_str(lines.next().ok_or_else(|| corrupt("missing header"))?)
        .map_err(|e| corrupt(format!("header: {e}")))?;
    if header.schema != SCHEMA {
        return Err(corrupt(format!("unknown schema `{}`", header.schema)));
    }
    if header.version != SCHEMA_VERSION {
        return Err(corrupt(format!("unsupported schema version {}", header.version)));
    }

    let mut phases = Vec::with_capacity(header.n_phases);
    for (i, line) in lines.enumerate() {
        let p: PhaseLine = serde_json::from_str(line).map_err(|e| corrupt(format!("phase line {i}: {e}")))?;
        if p.phase_index != i {
            return Err(corrupt(format!("phase line {i} carries index {}", p.phase_index)));
        }
        let expected_kind = if i == 0 { PhaseKind::Global } else { PhaseKind::Local };
        if p.result.phase != expected_kind {
            return Err(corrupt(format!("phase {i} has kind {:?}", p.result.phase)));
        }
        phases.push(p.result);
    }
    if phases.len() != header.n_phases {
        return Err(corrupt(format!("header announces {} phases, found {}", header.n_phases, phases.len())));
    }
    if phases.is_empty() && header.status != ExperimentStatus::Running {
        return Err(corrupt("status without phases"));
    }

    Ok(ExperimentRecord {
        experiment_id: header.experiment_id,
        fid: header.fid,
        dim: header.dim,
        ga_config: header.ga_config,
        budget_per_dim: header.budget_per_dim,
        phases,
        status: header.status,
    })
}

pub fn record_path(dir: &Path, experiment_id: &str) -> PathBuf {
    dir.join(format!("{experiment_id}{FILE_SUFFIX}"))
}

/// Writes `<dir>/<id>.hctps.jsonl` atomically (temp file, then rename).
pub fn save(dir: &Path, record: &ExperimentRecord) -> Result<PathBuf, PersistError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PersistError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = record_path(dir, &record.experiment_id);
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io(&tmp))?;
        f.write_all(persist(record).as_bytes()).map_err(io(&tmp))?;
        f.sync_all().map_err(io(&tmp))?;
    }
    fs::rename(&tmp, &path).map_err(io(&path))?;
    Ok(path)
}

pub fn load_file(path: &Path) -> Result<ExperimentRecord, PersistError> {
    let text = fs::read_to_string(path).map_err(|source| PersistError::Io { path: path.to_path_buf(), source })?;
    load(&text)
}
