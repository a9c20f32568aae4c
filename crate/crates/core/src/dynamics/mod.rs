//! Slow-time integration of the perturbed and effective equations, plus the
//! residual and dissipation diagnostics evaluated along trajectories.

mod diagnostics;
mod integrate;
mod io;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::action_angle::ActionVector;
use crate::error::{Error, Result};
use crate::spectral::ModeVector;

pub use diagnostics::{BOUND_SLACK, dissipation_check, dissipation_rhs, residual_xi, xi_sup_norm, DissipationReport};
pub use integrate::{averaged_actions, integrate_effective, integrate_perturbed, phi1, phi2};
pub use io::{trajectory_csv, write_trajectory, TRAJECTORY_CSV_HEADER, TRAJECTORY_FORMAT_VERSION};
pub(crate) use io::fmt_f64;

/// Recording cadence used when `record_every` is not given.
pub const DEFAULT_RECORDS_PER_UNIT_TIME: f64 = 64.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exact half-step phase, Heun step on `P`, exact half-step phase.
    #[default]
    StrangExactPhase,
    /// Second-order exponential time differencing (Cox-Matthews).
    EtdRk2,
}

fn one() -> f64 {
    1.0
}

fn default_threshold() -> f64 {
    1e6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt_slow: f64,
    #[serde(default = "one")]
    pub t_slow: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
    /// Scheme for the perturbed equation; effective runs always use ETD.
    #[serde(default)]
    pub scheme: Scheme,
    /// Steps between records; `None` means 64 records per unit `τ`.
    #[serde(default)]
    pub record_every: Option<usize>,
    /// Abort once `|v|_2` reaches this value.
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
}

impl IntegratorConfig {
    pub fn new(dt_slow: f64, epsilon: f64) -> Self {
        Self {
            dt_slow,
            t_slow: 1.0,
            epsilon,
            scheme: Scheme::default(),
            record_every: None,
            blowup_threshold: default_threshold(),
        }
    }

    pub fn with_horizon(mut self, t_slow: f64) -> Self {
        self.t_slow = t_slow;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_record_every(mut self, steps: usize) -> Self {
        self.record_every = Some(steps);
        self
    }

    pub fn with_blowup_threshold(mut self, threshold: f64) -> Self {
        self.blowup_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_slow > 0.0 && self.dt_slow.is_finite()) {
            return Err(Error::Config(format!("dt_slow must be positive, got {}", self.dt_slow)));
        }
        if !(self.t_slow > 0.0 && self.t_slow.is_finite()) {
            return Err(Error::Config(format!("t_slow must be positive, got {}", self.t_slow)));
        }
        if self.dt_slow > self.t_slow {
            return Err(Error::Config(format!("dt_slow {} exceeds horizon {}", self.dt_slow, self.t_slow)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if self.record_every == Some(0) {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::Config(format!("blowup_threshold must be positive, got {}", self.blowup_threshold)));
        }
        Ok(())
    }

    /// Number of steps and the step actually taken, so that the horizon is hit exactly.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_slow / self.dt_slow).round().max(1.0) as usize;
        (n, self.t_slow / n as f64)
    }

    pub fn record_stride(&self) -> usize {
        self.record_every.unwrap_or_else(|| {
            let (_, h) = self.steps();
            ((1.0 / (DEFAULT_RECORDS_PER_UNIT_TIME * h)).round() as usize).max(1)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Perturbed,
    Effective,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum TrajectoryStatus {
    Completed,
    Diverged { tau: f64 },
}

/// Recorded slow-time trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub kind: TrajectoryKind,
    pub config: IntegratorConfig,
    pub times: Vec<f64>,
    pub states: Vec<ModeVector>,
    pub actions: Vec<ActionVector>,
    /// `|v|_0`, `|v|_1`, `|v|_2` per record.
    pub norms: Vec<[f64; 3]>,
    pub diagnostics: BTreeMap<String, Vec<f64>>,
    pub status: TrajectoryStatus,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn diverged(&self) -> bool {
        matches!(self.status, TrajectoryStatus::Diverged { .. })
    }

    pub fn final_state(&self) -> &ModeVector {
        self.states.last().expect("trajectory has at least the initial record")
    }

    /// Attaches a per-record series under `name`.
    pub fn attach(&mut self, name: &str, series: Vec<f64>) -> Result<()> {
        if series.len() != self.len() {
            return Err(Error::Shape(format!("series '{name}' has {} entries for {} records", series.len(), self.len())));
        }
        self.diagnostics.insert(name.to_string(), series);
        Ok(())
    }
}

#[cfg(test)]
mod tests;
