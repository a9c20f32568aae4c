use serde::{Deserialize, Serialize};

use crate::action_angle::AngleVector;
use crate::error::{Error, Result};
use crate::spectral::TrigTerm;

/// Largest torus dimension accepted by the Weyl test.
pub const MAX_WEYL_DIM: usize = 4;

/// `constant + Σ (a cos(m·x) + b sin(m·x))` on `T^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPolynomial {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn single(wavevector: Vec<i64>, cos: f64, sin: f64) -> Self {
        Self { constant: 0.0, terms: vec![TrigTerm { wavevector, cos, sin }] }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, t| {
            let phase: f64 = t.wavevector.iter().zip(x).map(|(m, xi)| *m as f64 * xi).sum();
            acc + t.cos * phase.cos() + t.sin * phase.sin()
        })
    }

    /// Haar average: the constant plus cosine coefficients of zero wavevectors.
    pub fn haar_average(&self) -> f64 {
        self.constant + self.terms.iter().filter(|t| t.wavevector.iter().all(|&m| m == 0)).map(|t| t.cos).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub horizon: f64,
    pub time_average: f64,
    pub haar_average: f64,
    pub gap: f64,
}

/// Minimum number of Simpson panels per radian of the fastest phase.
const PANELS_PER_RADIAN: f64 = 256.0;

/// Compares `T⁻¹∫₀^T f(x0 + ωt) dt` with the Haar average for each `T`.
pub fn weyl_average_test(frequencies: &[f64], f: &TrigPolynomial, x0: &AngleVector, horizons: &[f64]) -> Result<Vec<WeylRow>> {
    let n = frequencies.len();
    if n == 0 || n > MAX_WEYL_DIM {
        return Err(Error::Config(format!("Weyl test needs 1..={MAX_WEYL_DIM} frequencies, got {n}")));
    }
    if x0.len() != n {
        return Err(Error::Shape(format!("x0 has {} angles for {n} frequencies", x0.len())));
    }
    if let Some(t) = f.terms.iter().find(|t| t.wavevector.len() != n) {
        return Err(Error::Shape(format!("wavevector {:?} does not match n = {n}", t.wavevector)));
    }
    let fastest = f
        .terms
        .iter()
        .map(|t| t.wavevector.iter().zip(frequencies).map(|(m, w)| *m as f64 * w).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let haar = f.haar_average();
    horizons
        .iter()
        .map(|&horizon| {
            if !(horizon > 0.0 && horizon.is_finite()) {
                return Err(Error::Config(format!("horizon must be positive, got {horizon}")));
            }
            let panels = ((horizon * fastest * PANELS_PER_RADIAN).ceil() as usize).max(512);
            let panels = panels + panels % 2;
            let h = horizon / panels as f64;
            let g = |t: f64| {
                let x: Vec<f64> = x0.iter().zip(frequencies).map(|(a, w)| a + w * t).collect();
                f.eval(&x)
            };
            let mut sum = g(0.0) + g(horizon);
            for i in 1..panels {
                sum += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
            }
            let time_average = sum * h / 3.0 / horizon;
            Ok(WeylRow { horizon, time_average, haar_average: haar, gap: (time_average - haar).abs() })
        })
        .collect()
}

/// Input file for the `weyl` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylConfig {
    pub frequencies: Vec<f64>,
    pub function: TrigPolynomial,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    pub horizons: Vec<f64>,
}

impl WeylConfig {
    pub fn run(&self) -> Result<Vec<WeylRow>> {
        let x0 = AngleVector::new(self.x0.clone().unwrap_or_else(|| vec![0.0; self.frequencies.len()]));
        weyl_average_test(&self.frequencies, &self.function, &x0, &self.horizons)
    }
}
