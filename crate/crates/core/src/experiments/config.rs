//! JSON run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cutoff::{Completion, RadialCutoff};
use crate::model::{gaussian_data, Field, Grid, ProblemSpec};
use crate::solver::SolverConfig;

use super::ExperimentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Simulate,
    VerifyIdentities,
    CriteriaVsOutcome,
    Threshold,
    ScatterProbe,
}

/// Initial-data constructor and its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `A exp(-|x|²/(2σ²)) exp(i b |x|²)`
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        chirp: f64,
    },
}

impl InitialData {
    pub fn build(&self, grid: &Grid) -> Result<Field, ExperimentError> {
        match *self {
            InitialData::Gaussian { amplitude, width, chirp } => Ok(gaussian_data(grid, amplitude, width, chirp)?),
        }
    }

    /// Whether the datum is invariant under rotations about the box center.
    pub fn is_radial(&self) -> bool {
        matches!(self, InitialData::Gaussian { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub a_lo: f64,
    pub a_hi: f64,
    pub width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterSpec {
    pub t1: f64,
    pub t2: f64,
}

/// Residual tolerances of `verify_identities`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub mass: f64,
    pub energy: f64,
    pub virial: f64,
    pub sigma: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass: 1e-10,
            energy: 1e-4,
            virial: 1e-3,
            sigma: 1e-3,
        }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub grid: Grid,
    pub initial: InitialData,
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_radius: Option<f64>,
    #[serde(default)]
    pub cutoff_completion: Completion,
    pub scenario: Scenario,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Data family of `criteria_vs_outcome`; empty means `[initial]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub family: Vec<InitialData>,
    /// Damping values of `criteria_vs_outcome`; empty means `[problem.damping]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub damping_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Times at which `simulate` writes field snapshots.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.problem.dimension != self.grid.dim() {
            return Err(ExperimentError::Config(format!(
                "problem dimension {} but grid dimension {}",
                self.problem.dimension,
                self.grid.dim()
            )));
        }
        self.solver.validate()?;
        if let Some(r) = self.cutoff_radius {
            RadialCutoff::new(r, Default::default(), self.cutoff_completion)?;
        }
        match self.scenario {
            Scenario::Threshold if self.threshold.is_none() => {
                Err(ExperimentError::Config("threshold scenario needs a `threshold` block".into()))
            }
            Scenario::ScatterProbe if self.scatter.is_none() => {
                Err(ExperimentError::Config("scatter_probe scenario needs a `scatter` block".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn cutoff(&self) -> Result<Option<RadialCutoff>, ExperimentError> {
        self.cutoff_radius
            .map(|r| RadialCutoff::new(r, Default::default(), self.cutoff_completion))
            .transpose()
            .map_err(Into::into)
    }

    pub fn initial_field(&self) -> Result<Field, ExperimentError> {
        self.initial.build(&self.grid)
    }

    pub fn with_damping(&self, a: f64) -> Result<Self, ExperimentError> {
        let mut out = self.clone();
        out.problem = self.problem.with_damping(a)?;
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact JSON form, without `output_dir`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        let compact = serde_json::to_string(&value).expect("config serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    /// First 16 hex digits of [`RunConfig::hash`], used for file names.
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }
}

/// Parses a config, or the `config` member of a run summary.
pub fn parse_config(text: &str) -> Result<RunConfig, ExperimentError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value.get("config") {
        Some(c) if value.get("problem").is_none() => c.clone(),
        _ => value,
    };
    let cfg: RunConfig = serde_json::from_value(inner)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ExperimentError> {
    parse_config(&std::fs::read_to_string(path)?)
}
