//! Experiment configuration shared by the CLI subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::EpisodeConfig;
use crate::instance::{fixtures, generate_random_instance, ProblemInstance};
use crate::lp::DEFAULT_FEAS_TOL;
use crate::policy::PolicyKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    File { path: PathBuf },
    /// Built-in fixture, `"f1"` or `"f2"`.
    Fixture { name: String },
    Random { m_raw: usize, d_raw: usize, b: f64, seed: u64 },
}

impl InstanceSource {
    pub fn resolve(&self) -> Result<ProblemInstance> {
        match self {
            InstanceSource::File { path } => ProblemInstance::load(path),
            InstanceSource::Fixture { name } => match name.as_str() {
                "f1" => Ok(fixtures::f1()),
                "f2" => Ok(fixtures::f2()),
                other => Err(Error::Validation(format!("unknown fixture {other:?}"))),
            },
            InstanceSource::Random { m_raw, d_raw, b, seed } => generate_random_instance(*m_raw, *d_raw, *b, *seed),
        }
    }
}

fn default_tol() -> f64 {
    DEFAULT_FEAS_TOL
}

fn default_radius_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub policies: Vec<PolicyKind>,
    #[serde(rename = "T_grid")]
    pub t_grid: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Feasibility tolerance for diagnostics.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// `None` keeps each policy's default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
    #[serde(default = "default_radius_scale")]
    pub radius_scale: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::Validation("no policies configured".into()));
        }
        if self.t_grid.is_empty() {
            return Err(Error::Validation("T_grid is empty".into()));
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("T_grid must be strictly ascending".into()));
        }
        if self.t_grid[0] == 0 {
            return Err(Error::Validation("horizons must be positive".into()));
        }
        if self.reps == 0 {
            return Err(Error::Validation("reps must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Validation(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.radius_scale.is_finite() && self.radius_scale >= 0.0) {
            return Err(Error::Validation(format!(
                "radius_scale must be finite and non-negative, got {}",
                self.radius_scale
            )));
        }
        if let InstanceSource::Random { b, .. } = self.instance {
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::Validation(format!("b must lie in (0, 1], got {b}")));
            }
        }
        Ok(())
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            monotone: self.monotone,
            radius_scale: self.radius_scale,
            record_steps: false,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
