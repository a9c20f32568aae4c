use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, 2π)^d`, `d ∈ {1, 2}`.
///
/// Points are stored row-major: in two dimensions the flat index is
/// `i * n + j` with `x = (i h, j h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid {
    dim: usize,
    points_per_axis: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    points_per_axis: usize,
}

impl TryFrom<RawGrid> for Grid {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid::new(raw.dim, raw.points_per_axis)
    }
}

impl Grid {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
            return Err(Error::Config(format!(
                "points per axis must be a power of two >= 8, got {points_per_axis}"
            )));
        }
        Ok(Self { dim, points_per_axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Total number of grid points, `N^d`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points_per_axis as f64
    }

    /// Trapezoid weight of a single grid cell, `(2π/N)^d`.
    pub fn quadrature_weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Measure of the torus, `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Coordinates of the point with flat index `idx`; unused axes are zero.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [idx as f64 * h, 0.0],
            _ => {
                let n = self.points_per_axis;
                [(idx / n) as f64 * h, (idx % n) as f64 * h]
            }
        }
    }

    /// Signed wavenumber of FFT bin `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.points_per_axis;
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// FFT bin holding wavenumber `k`.
    pub fn bin(&self, k: i64) -> usize {
        k.rem_euclid(self.points_per_axis as i64) as usize
    }

    /// Wavevector of flat spectral index `idx`.
    pub fn wavevector(&self, idx: usize) -> [i64; 2] {
        match self.dim {
            1 => [self.wavenumber(idx), 0],
            _ => {
                let n = self.points_per_axis;
                [self.wavenumber(idx / n), self.wavenumber(idx % n)]
            }
        }
    }

    /// Flat spectral index of wavevector `m`.
    pub fn spectral_index(&self, m: [i64; 2]) -> usize {
        match self.dim {
            1 => self.bin(m[0]),
            _ => self.bin(m[0]) * self.points_per_axis + self.bin(m[1]),
        }
    }

    /// Plane-wave cutoff `K` per axis of the Galerkin space.
    ///
    /// Products of four band-limited fields stay below the grid's Nyquist
    /// limit, so cubic terms projected back onto the basis are alias-free.
    pub fn plane_wave_cutoff(&self) -> i64 {
        (self.points_per_axis / 4) as i64 - 1
    }

    /// Largest admissible truncation, `⌊(N/3)^d⌋`.
    pub fn max_truncation(&self) -> usize {
        let third = self.points_per_axis as f64 / 3.0;
        third.powi(self.dim as i32).floor() as usize
    }
}
