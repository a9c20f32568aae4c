use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// One term `cos_coeff · cos(m·x) + sin_coeff · sin(m·x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub wavevector: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Closed-form description of a potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Constant {
        value: f64,
    },
    TrigPolynomial {
        constant: f64,
        terms: Vec<TrigTerm>,
    },
    /// Random trigonometric polynomial with coefficients uniform in
    /// `[-amplitude, amplitude]`; the constant term is lifted so that `V ≥ 1`.
    RandomTrig {
        seed: u64,
        degree: usize,
        amplitude: f64,
    },
}

impl PotentialSpec {
    pub fn constant(value: f64) -> Self {
        PotentialSpec::Constant { value }
    }

    /// `constant + Σ (a cos(m x) + b sin(m x))` in one dimension.
    pub fn trig_1d(constant: f64, terms: &[(i64, f64, f64)]) -> Self {
        PotentialSpec::TrigPolynomial {
            constant,
            terms: terms
                .iter()
                .map(|&(m, cos, sin)| TrigTerm { wavevector: vec![m], cos, sin })
                .collect(),
        }
    }

    /// Expands the description into an explicit trigonometric polynomial.
    pub fn resolve(&self, dim: usize) -> Result<(f64, Vec<TrigTerm>)> {
        match self {
            PotentialSpec::Constant { value } => Ok((*value, Vec::new())),
            PotentialSpec::TrigPolynomial { constant, terms } => {
                for t in terms {
                    if t.wavevector.len() != dim {
                        return Err(Error::Shape(format!(
                            "potential wavevector {:?} does not match dimension {dim}",
                            t.wavevector
                        )));
                    }
                }
                Ok((*constant, terms.clone()))
            }
            PotentialSpec::RandomTrig { seed, degree, amplitude } => {
                if *amplitude < 0.0 || !amplitude.is_finite() {
                    return Err(Error::Config("random potential amplitude must be finite and >= 0".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let deg = *degree as i64;
                let mut wavevectors = Vec::new();
                if dim == 1 {
                    wavevectors.extend((1..=deg).map(|m| vec![m]));
                } else {
                    for a in 0..=deg {
                        for b in -deg..=deg {
                            if (a, b) == (0, 0) || (a == 0 && b < 0) {
                                continue;
                            }
                            wavevectors.push(vec![a, b]);
                        }
                    }
                }
                let mut lift = 1.0;
                let terms: Vec<TrigTerm> = wavevectors
                    .into_iter()
                    .map(|wavevector| {
                        let cos = rng.gen_range(-1.0..=1.0) * amplitude;
                        let sin = rng.gen_range(-1.0..=1.0) * amplitude;
                        lift += cos.abs() + sin.abs();
                        TrigTerm { wavevector, cos, sin }
                    })
                    .collect();
                Ok((lift, terms))
            }
        }
    }
}

/// Real potential sampled on a grid together with its description.
#[derive(Clone, Debug)]
pub struct Potential {
    grid: Grid,
    values: Vec<f64>,
    description: PotentialSpec,
}

impl Potential {
    pub fn new(description: PotentialSpec, grid: Grid) -> Result<Self> {
        let (constant, terms) = description.resolve(grid.dim())?;
        let values = (0..grid.len())
            .map(|idx| {
                let x = grid.point(idx);
                terms.iter().fold(constant, |acc, t| {
                    let phase: f64 = t.wavevector.iter().zip(x.iter()).map(|(&m, &xi)| m as f64 * xi).sum();
                    acc + t.cos * phase.cos() + t.sin * phase.sin()
                })
            })
            .collect();
        Self::from_values(grid, values, description)
    }

    pub fn from_values(grid: Grid, values: Vec<f64>, description: PotentialSpec) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "potential has {} values, grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("potential must be finite".into()));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        // A_V stays positive definite as long as V > 0; V >= 1 is reported separately
        if min <= 0.0 {
            return Err(Error::Domain(format!("potential minimum {min} is not positive")));
        }
        Ok(Self { grid, values, description })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn description(&self) -> &PotentialSpec {
        &self.description
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when min V >= 1 up to roundoff, which guarantees lambda_1 >= 1.
    pub fn meets_unit_floor(&self) -> bool {
        self.min() >= 1.0 - 1e-12
    }
}
