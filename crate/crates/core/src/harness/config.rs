use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::averaging::AveragingBudget;
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::fields::{NonlinearityKind, NonlinearitySpec};
use crate::spectral::{assemble_operator, hp_norm, Grid, ModeVector, Potential, PotentialSpec, SpectralBasis};

/// Environment variable consulted for the averaging seed when no `--seed` is given.
pub const SEED_ENV_VAR: &str = "NLSAVG_SEED";

/// Initial datum `v0`: leading mode coefficients (padded with zeros),
/// optionally rescaled to a prescribed `||u0||₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub modes: Vec<Complex64>,
    #[serde(default)]
    pub l2_norm: Option<f64>,
}

impl InitialCondition {
    pub fn mode_vector(&self, basis: &SpectralBasis) -> Result<ModeVector> {
        let m = basis.truncation();
        if self.modes.len() > m {
            return Err(Error::Config(format!("initial condition has {} modes, truncation is {m}", self.modes.len())));
        }
        let mut v = self.modes.clone();
        v.resize(m, Complex64::new(0.0, 0.0));
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Config("initial condition has non-finite coefficients".into()));
        }
        if let Some(target) = self.l2_norm {
            if !(target >= 0.0 && target.is_finite()) {
                return Err(Error::Config(format!("l2_norm must be finite and >= 0, got {target}")));
            }
            let current = hp_norm(&v, basis, 0.0);
            if current == 0.0 && target > 0.0 {
                return Err(Error::Config("cannot rescale a zero initial condition".into()));
            }
            if current > 0.0 {
                v.iter_mut().for_each(|c| *c *= target / current);
            }
        }
        Ok(ModeVector::new(v))
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Also write per-run trajectory CSV and JSON sidecars.
    #[serde(default)]
    pub write_trajectories: bool,
    /// Fill `wallclock_s` with measured times; off by default so outputs are byte-reproducible.
    #[serde(default)]
    pub record_wallclock: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), write_trajectories: false, record_wallclock: false }
    }
}

/// Everything needed for a simulation or a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub truncation: usize,
    pub nonlinearity: NonlinearitySpec,
    /// `epsilon` here is used by single runs; studies take it from `epsilon_sweep`.
    pub integrator: IntegratorConfig,
    pub epsilon_sweep: Vec<f64>,
    #[serde(default)]
    pub comparison_q: f64,
    #[serde(default)]
    pub averaging: AveragingBudget,
    pub initial_condition: InitialCondition,
    #[serde(default)]
    pub output: OutputConfig,
    /// Smoothness index of `V`, carried as metadata only.
    #[serde(default)]
    pub smoothness_n: Option<u32>,
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("config schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation == 0 || self.truncation > self.grid.max_truncation() {
            return Err(Error::Config(format!(
                "truncation {} outside 1..={} for this grid",
                self.truncation,
                self.grid.max_truncation()
            )));
        }
        self.nonlinearity.validate()?;
        self.integrator.validate()?;
        if self.initial_condition.modes.len() > self.truncation {
            return Err(Error::Config("initial condition has more modes than the truncation".into()));
        }
        if self.epsilon_sweep.is_empty() {
            return Err(Error::Config("epsilon_sweep is empty".into()));
        }
        for &eps in &self.epsilon_sweep {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::Config(format!("epsilon {eps} outside (0, 1]")));
            }
        }
        if self.epsilon_sweep.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("epsilon_sweep must be strictly decreasing".into()));
        }
        if !(self.comparison_q >= 0.0 && self.comparison_q.is_finite()) {
            return Err(Error::Config(format!("comparison_q must be >= 0, got {}", self.comparison_q)));
        }
        if self.nonlinearity.kind == NonlinearityKind::Cgl {
            self.nonlinearity.check_cgl_conditions(self.grid.dim())?;
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<SpectralBasis> {
        let potential = Potential::new(self.potential.clone(), self.grid)?;
        assemble_operator(&potential, self.truncation)
    }

    pub fn integrator_for(&self, epsilon: f64) -> IntegratorConfig {
        IntegratorConfig { epsilon, ..self.integrator.clone() }
    }

    /// Overrides the averaging seed: explicit value first, then the environment.
    pub fn apply_seed(&mut self, explicit: Option<u64>) -> Result<()> {
        if let Some(seed) = explicit {
            self.averaging.seed = seed;
        } else if let Ok(text) = std::env::var(SEED_ENV_VAR) {
            self.averaging.seed =
                text.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV_VAR}={text} is not an unsigned integer")))?;
        }
        Ok(())
    }

    /// The reference Ginzburg-Landau setup used by the regression suite.
    pub fn reference() -> Self {
        Self {
            grid: Grid::new(1, 64).expect("valid grid"),
            potential: PotentialSpec::trig_1d(1.0, &[(1, 0.5, 0.0), (2, 0.0, 0.3)]),
            truncation: 16,
            nonlinearity: NonlinearitySpec::cgl(1.0, 1.0, 1.0, 1.0),
            integrator: IntegratorConfig::new(1.0 / 8192.0, 1.0),
            epsilon_sweep: vec![0.2, 0.1, 0.05, 0.025],
            comparison_q: 0.0,
            averaging: AveragingBudget::default(),
            initial_condition: InitialCondition { modes: vec![Complex64::new(1.0, 1.0)], l2_norm: Some(1.0) },
            output: OutputConfig::default(),
            smoothness_n: None,
        }
    }
}
