use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

/// Normalised discrete Fourier transform on a [`Grid`].
///
/// `forward` returns coefficients `c(m)` with `u(x) = Σ c(m) e^{i m·x}`.
#[derive(Clone)]
pub struct FourierTransform {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierTransform").field("grid", &self.grid).finish()
    }
}

impl FourierTransform {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_axis();
        // rows
        plan.process(data);
        if self.grid.dim() == 2 {
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    column[i] = data[i * n + j];
                }
                plan.process(&mut column);
                for i in 0..n {
                    data[i * n + j] = column[i];
                }
            }
        }
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.transform(&mut data, &self.forward);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = coeffs.to_vec();
        self.transform(&mut data, &self.inverse);
        data
    }

    /// `|m|²` for every flat spectral index.
    pub fn squared_wavenumbers(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|idx| {
                let m = self.grid.wavevector(idx);
                (m[0] * m[0] + m[1] * m[1]) as f64
            })
            .collect()
    }

    /// Spectral Laplacian of a grid field.
    pub fn laplacian(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut coeffs = self.forward(values);
        for (c, k2) in coeffs.iter_mut().zip(self.squared_wavenumbers()) {
            *c *= -k2;
        }
        self.inverse(&coeffs)
    }

    /// Zeroes every coefficient with a component beyond `cutoff`.
    pub fn band_limit(&self, coeffs: &mut [Complex64], cutoff: i64) {
        for (idx, c) in coeffs.iter_mut().enumerate() {
            let m = self.grid.wavevector(idx);
            if m[0].abs() > cutoff || m[1].abs() > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
}
