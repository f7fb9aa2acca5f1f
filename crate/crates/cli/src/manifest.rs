use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hctps_core::FunctionId;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::RunError;

/// One function or the whole suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionSelection {
    All,
    One(FunctionId),
}

impl FunctionSelection {
    pub fn functions(self) -> Vec<FunctionId> {
        match self {
            FunctionSelection::All => FunctionId::ALL.to_vec(),
            FunctionSelection::One(fid) => vec![fid],
        }
    }
}

impl fmt::Display for FunctionSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSelection::All => f.write_str("all"),
            FunctionSelection::One(fid) => write!(f, "{fid}"),
        }
    }
}

impl FromStr for FunctionSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(FunctionSelection::All);
        }
        s.parse::<FunctionId>().map(FunctionSelection::One).map_err(|e| e.to_string())
    }
}

impl Serialize for FunctionSelection {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctionSelection {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Standalone GA over the full cube only.
    GlobalOnly,
    /// Global phase, then the tabled subcube and scale for each function.
    HctpsFixture,
    /// Global phase, then the octant and scale given on the command line.
    HctpsCustom,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::GlobalOnly => "global-only",
            Mode::HctpsFixture => "hctps-fixture",
            Mode::HctpsCustom => "hctps-custom",
        }
    }
}

/// Everything `hctps run` needs; written next to the results as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub function: FunctionSelection,
    pub dim: usize,
    pub n_runs: usize,
    pub seed: u64,
    pub budget_per_dim: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub octant: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_exponent: Option<u32>,
    pub out: PathBuf,
}

impl RunManifest {
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.dim < 3 {
            return bad(format!("--dim must be at least 3, got {}", self.dim));
        }
        if self.n_runs == 0 {
            return bad("--runs must be at least 1".into());
        }
        if self.budget_per_dim == 0 {
            return bad("--budget-per-dim must be positive".into());
        }
        match (self.mode, self.octant) {
            (Mode::HctpsCustom, None) => bad("--mode hctps-custom needs --octant".into()),
            (Mode::HctpsCustom, Some(o)) if !(1..=8).contains(&o) => bad(format!("--octant must be in 1..=8, got {o}")),
            (Mode::GlobalOnly | Mode::HctpsFixture, Some(_)) => {
                bad(format!("--octant only applies to hctps-custom, not {}", self.mode.as_str()))
            }
            _ if self.mode != Mode::HctpsCustom && self.scale_exponent.is_some() => {
                bad(format!("--scale-exp only applies to hctps-custom, not {}", self.mode.as_str()))
            }
            _ => Ok(()),
        }
    }

    /// File name stem for one function's experiment: `<fid>-d<dim>-s<seed>-<mode>`.
    pub fn experiment_id(&self, fid: FunctionId) -> String {
        format!("{fid}-d{}-s{}-{}", self.dim, self.seed, self.mode.as_str())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            function: FunctionSelection::All,
            dim: 30,
            n_runs: 20,
            seed: 42,
            budget_per_dim: 50,
            mode: Mode::HctpsFixture,
            octant: None,
            scale_exponent: None,
            out: PathBuf::from("out"),
        }
    }

    #[test]
    fn round_trips() {
        let m = manifest();
        assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
        let custom = RunManifest {
            function: FunctionSelection::One(FunctionId::F12),
            mode: Mode::HctpsCustom,
            octant: Some(6),
            scale_exponent: Some(80),
            seed: u64::MAX,
            ..m
        };
        let text = custom.to_json();
        assert!(text.contains("\"function\": \"F12\"") && text.contains("\"mode\": \"hctps-custom\""));
        assert_eq!(RunManifest::from_json(&text).unwrap(), custom);
    }

    #[test]
    fn validation() {
        assert!(manifest().validate().is_ok());
        let bad = [
            RunManifest { dim: 2, ..manifest() },
            RunManifest { n_runs: 0, ..manifest() },
            RunManifest { mode: Mode::HctpsCustom, ..manifest() },
            RunManifest { mode: Mode::HctpsCustom, octant: Some(9), ..manifest() },
            RunManifest { octant: Some(1), ..manifest() },
            RunManifest { scale_exponent: Some(3), ..manifest() },
        ];
        for m in bad {
            assert!(matches!(m.validate(), Err(RunError::Config(_))), "{m:?}");
        }
        assert!(RunManifest::from_json("{\"function\": \"F1\"}").is_err());
        assert!(RunManifest::from_json(&manifest().to_json().replace("\"all\"", "\"F15\"")).is_err());
    }

    #[test]
    fn selection_parsing() {
        assert_eq!("ALL".parse::<FunctionSelection>(), Ok(FunctionSelection::All));
        assert_eq!("f7".parse::<FunctionSelection>(), Ok(FunctionSelection::One(FunctionId::F7)));
        assert!("F0".parse::<FunctionSelection>().is_err());
        assert_eq!(FunctionSelection::One(FunctionId::F3).functions(), vec![FunctionId::F3]);
        assert_eq!(FunctionSelection::All.functions().len(), 14);
    }
}
