//! Action-angle coordinates of the linear flow on mode space.

use std::f64::consts::TAU;
use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ModeVector, SpectralBasis};

/// Amplitudes below this are treated as exact zeros when taking angles.
pub const ZERO_AMPLITUDE: f64 = 1e-14;

/// Actions `I_k = |v_k|² / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionVector(Vec<f64>);

impl ActionVector {
    pub fn new(actions: Vec<f64>) -> Result<Self> {
        if let Some(bad) = actions.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
            return Err(Error::Domain(format!("actions must be finite and non-negative, got {bad}")));
        }
        Ok(Self(actions))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `max_k |I_k - J_k|`.
    pub fn sup_distance(&self, other: &ActionVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl Deref for ActionVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Angles reduced to `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    pub fn new(angles: impl IntoIterator<Item = f64>) -> Self {
        Self(angles.into_iter().map(reduce_angle).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    /// Componentwise sum, reduced mod 2π.
    pub fn add(&self, other: &AngleVector) -> Self {
        Self::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.0.iter().map(|a| -a))
    }
}

impl Deref for AngleVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub fn actions(v: &[Complex64]) -> ActionVector {
    ActionVector(v.iter().map(|c| 0.5 * c.norm_sqr()).collect())
}

pub fn angles(v: &[Complex64]) -> AngleVector {
    AngleVector(v.iter().map(|c| if c.norm() < ZERO_AMPLITUDE { 0.0 } else { reduce_angle(c.arg()) }).collect())
}

/// Torus action `(Φ_θ v)_k = e^{iθ_k} v_k`.
pub fn rotate(v: &[Complex64], theta: &[f64]) -> Result<ModeVector> {
    if v.len() != theta.len() {
        return Err(Error::Shape(format!("rotation of {} modes by {} angles", v.len(), theta.len())));
    }
    Ok(rotate_unchecked(v, theta))
}

pub(crate) fn rotate_unchecked(v: &[Complex64], theta: &[f64]) -> ModeVector {
    ModeVector::new(v.iter().zip(theta).map(|(c, &t)| c * Complex64::from_polar(1.0, t)).collect())
}

/// Right inverse of the action map: `v_k = √(2 I_k) e^{iθ_k}`.
pub fn lift(actions: &[f64], theta: &[f64]) -> Result<ModeVector> {
    if actions.len() != theta.len() {
        return Err(Error::Shape(format!("lift of {} actions with {} angles", actions.len(), theta.len())));
    }
    if let Some(bad) = actions.iter().find(|a| !(**a >= 0.0)) {
        return Err(Error::Domain(format!("cannot lift negative action {bad}")));
    }
    Ok(ModeVector::new(actions.iter().zip(theta).map(|(&i, &t)| Complex64::from_polar((2.0 * i).sqrt(), t)).collect()))
}

/// Weighted `ℓ¹` action norm `|I|~_p = 2 Σ λ_k^p |I_k|`.
pub fn action_norm(actions: &[f64], basis: &SpectralBasis, p: f64) -> f64 {
    2.0 * actions.iter().zip(basis.eigenvalues()).map(|(i, l)| l.powf(p) * i.abs()).sum::<f64>()
}

/// `ℓ∞` action distance used alongside the weighted norm in diagnostics.
pub fn action_sup_norm(actions: &[f64]) -> f64 {
    actions.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
}
