use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Truncated sequence of complex mode coefficients `v_1..v_M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeVector(Vec<Complex64>);

impl ModeVector {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self(coeffs)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    /// Unit vector `e_k` with one-based index `k`.
    pub fn unit(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[k - 1] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: f64, other: &[Complex64]) -> Self {
        Self(self.0.iter().zip(other).map(|(a, b)| a + b * scale).collect())
    }

    pub fn scaled(&self, scale: Complex64) -> Self {
        Self(self.0.iter().map(|a| a * scale).collect())
    }

    /// Euclidean distance `|self - other|_0` (unweighted).
    pub fn distance(&self, other: &[Complex64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.0.len() != expected {
            return Err(Error::Shape(format!("mode vector has length {}, expected {expected}", self.0.len())));
        }
        Ok(())
    }
}

impl Deref for ModeVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for ModeVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for ModeVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// Complex scalar field sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    grid: Grid,
    values: Vec<Complex64>,
}

impl FieldState {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Real `L²` pairing `⟨u, w⟩ = Re ∫ u w̄ dx` by trapezoid quadrature.
    pub fn inner(&self, other: &FieldState) -> f64 {
        self.grid.quadrature_weight()
            * self.values.iter().zip(&other.values).map(|(a, b)| (a * b.conj()).re).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub(crate) fn check_grid(&self, grid: Grid) -> Result<()> {
        if self.grid != grid {
            return Err(Error::Shape(format!("field grid {:?} does not match basis grid {:?}", self.grid, grid)));
        }
        Ok(())
    }
}
