use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::fourier::FourierTransform;
use super::grid::Grid;
use super::potential::Potential;
use super::state::{FieldState, ModeVector};
use crate::error::{Error, Result};

/// Eigenpairs `{λ_k, ζ_k}` of `A_V = -Δ + V` on a truncated plane-wave space.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    potential: Potential,
    eigenvalues: Vec<f64>,
    /// `M` real eigenfunctions on the grid, eigenfunction-major.
    zeta: Vec<f64>,
    /// `⟨V ζ_k, ζ_j⟩`, row-major `M x M`.
    potential_matrix: Vec<f64>,
    fourier: FourierTransform,
}

/// Real orthonormal trigonometric basis function as a combination of
/// normalised plane waves `e^{i m·x} / (2π)^{d/2}`.
type RealBasisFunction = Vec<([i64; 2], Complex64)>;

fn real_trig_basis(grid: Grid) -> Vec<RealBasisFunction> {
    let k = grid.plane_wave_cutoff();
    let one = Complex64::new(1.0, 0.0);
    let mut out = vec![vec![([0, 0], one)]];
    let mut positive = Vec::new();
    if grid.dim() == 1 {
        positive.extend((1..=k).map(|m| [m, 0]));
    } else {
        for a in 0..=k {
            for b in -k..=k {
                if a > 0 || b > 0 {
                    positive.push([a, b]);
                }
            }
        }
    }
    let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let s = Complex64::new(0.0, FRAC_1_SQRT_2);
    for m in positive {
        let neg = [-m[0], -m[1]];
        out.push(vec![(m, c), (neg, c)]);
        out.push(vec![(m, -s), (neg, s)]);
    }
    out
}

/// Assembles the Galerkin matrix of `A_V` in a real trigonometric basis,
/// diagonalises it and keeps the lowest `truncation` eigenpairs.
pub fn assemble_operator(potential: &Potential, truncation: usize) -> Result<SpectralBasis> {
    let grid = potential.grid();
    if truncation == 0 || truncation > grid.max_truncation() {
        return Err(Error::Config(format!(
            "truncation {truncation} outside 1..={} for grid N = {}, d = {}",
            grid.max_truncation(),
            grid.points_per_axis(),
            grid.dim()
        )));
    }
    if potential.min() <= 0.0 {
        return Err(Error::Domain(format!("potential minimum {} is not positive", potential.min())));
    }
    let fourier = FourierTransform::new(grid);
    let v_values: Vec<Complex64> = potential.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let v_hat = fourier.forward(&v_values);

    let basis = real_trig_basis(grid);
    let b = basis.len();
    let mut galerkin = DMatrix::<f64>::zeros(b, b);
    for (i, fi) in basis.iter().enumerate() {
        for (j, fj) in basis.iter().enumerate().skip(i) {
            let mut entry = Complex64::new(0.0, 0.0);
            for &(m, am) in fj {
                for &(n, an) in fi {
                    let mut h = v_hat[grid.spectral_index([n[0] - m[0], n[1] - m[1]])];
                    if m == n {
                        h += (m[0] * m[0] + m[1] * m[1]) as f64;
                    }
                    entry += am * an.conj() * h;
                }
            }
            galerkin[(i, j)] = entry.re;
            galerkin[(j, i)] = entry.re;
        }
    }

    let eigen = SymmetricEigen::new(galerkin);
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&a, &c| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[c]).then(a.cmp(&c)));

    let norm = 1.0 / grid.volume().sqrt();
    let mut eigenvalues = Vec::with_capacity(truncation);
    let mut zeta = Vec::with_capacity(truncation * grid.len());
    for &col in order.iter().take(truncation) {
        let coeffs = eigen.eigenvectors.column(col);
        // deterministic sign: largest coefficient positive
        let pivot = coeffs
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |best, (i, c)| if c.abs() > best.1 + 1e-12 { (i, c.abs()) } else { best })
            .0;
        let sign = if coeffs[pivot] < 0.0 { -1.0 } else { 1.0 };
        let mut spectrum = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (i, f) in basis.iter().enumerate() {
            for &(m, a) in f {
                spectrum[grid.spectral_index(m)] += a * (sign * coeffs[i] * norm);
            }
        }
        zeta.extend(fourier.inverse(&spectrum).iter().map(|c| c.re));
        eigenvalues.push(eigen.eigenvalues[col]);
    }
    SpectralBasis::from_parts(potential.clone(), eigenvalues, zeta)
}

impl SpectralBasis {
    /// Builds a basis from precomputed eigenpairs (e.g. an imported document).
    pub fn from_parts(potential: Potential, eigenvalues: Vec<f64>, zeta: Vec<f64>) -> Result<Self> {
        let grid = potential.grid();
        let m = eigenvalues.len();
        if m == 0 || zeta.len() != m * grid.len() {
            return Err(Error::Shape(format!(
                "{} eigenfunction values for {m} modes on {} points",
                zeta.len(),
                grid.len()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("eigenvalues must be ascending".into()));
        }
        let w = grid.quadrature_weight();
        let g = grid.len();
        let mut potential_matrix = vec![0.0; m * m];
        for j in 0..m {
            let zj = &zeta[j * g..(j + 1) * g];
            for k in j..m {
                let zk = &zeta[k * g..(k + 1) * g];
                let val = w * potential.values().iter().zip(zj).zip(zk).map(|((v, a), b)| v * a * b).sum::<f64>();
                potential_matrix[j * m + k] = val;
                potential_matrix[k * m + j] = val;
            }
        }
        Ok(Self { potential, eigenvalues, zeta, potential_matrix, fourier: FourierTransform::new(grid) })
    }

    pub fn grid(&self) -> Grid {
        self.potential.grid()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn truncation(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenfunction `ζ_k` on the grid, one-based `k`.
    pub fn eigenfunction(&self, k: usize) -> &[f64] {
        let g = self.grid().len();
        &self.zeta[(k - 1) * g..k * g]
    }

    pub(crate) fn eigenfunctions_flat(&self) -> &[f64] {
        &self.zeta
    }

    pub fn quadrature_weight(&self) -> f64 {
        self.grid().quadrature_weight()
    }

    pub fn fourier(&self) -> &FourierTransform {
        &self.fourier
    }

    /// `⟨V ζ_k, ζ_j⟩` for zero-based `j, k`.
    pub fn potential_element(&self, j: usize, k: usize) -> f64 {
        self.potential_matrix[j * self.truncation() + k]
    }

    /// Diagonal `M_k = ⟨V ζ_k, ζ_k⟩`.
    pub fn potential_diagonal(&self) -> Vec<f64> {
        (0..self.truncation()).map(|k| self.potential_element(k, k)).collect()
    }

    /// `max_{j,k} |⟨ζ_j, ζ_k⟩ - δ_jk|` under grid quadrature.
    pub fn orthonormality_residual(&self) -> f64 {
        let w = self.quadrature_weight();
        let m = self.truncation();
        let mut worst = 0.0_f64;
        for j in 1..=m {
            for k in j..=m {
                let ip = w * self.eigenfunction(j).iter().zip(self.eigenfunction(k)).map(|(a, b)| a * b).sum::<f64>();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    /// Mode-space Laplacian `Ψ Δ Ψ^{-1} v = -Λ v + (⟨V ζ_k, ζ_j⟩) v`.
    pub fn apply_laplacian(&self, v: &[Complex64]) -> Vec<Complex64> {
        let m = self.truncation();
        (0..m)
            .map(|j| {
                let row = &self.potential_matrix[j * m..(j + 1) * m];
                let coupled = row.iter().zip(v).fold(Complex64::new(0.0, 0.0), |acc, (a, c)| acc + c * *a);
                coupled - v[j] * self.eigenvalues[j]
            })
            .collect()
    }

    /// `v_k = ⟨u, ζ_k⟩` on raw grid values.
    pub(crate) fn project(&self, values: &[Complex64]) -> Vec<Complex64> {
        let w = self.quadrature_weight();
        self.zeta
            .chunks_exact(values.len())
            .map(|z| {
                let (re, im) = values.iter().zip(z).fold((0.0, 0.0), |(re, im), (u, &zk)| (re + u.re * zk, im + u.im * zk));
                Complex64::new(w * re, w * im)
            })
            .collect()
    }

    /// `Σ v_k ζ_k` on raw grid values.
    pub(crate) fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let g = self.grid().len();
        let mut out = vec![Complex64::new(0.0, 0.0); g];
        for (c, z) in coeffs.iter().zip(self.zeta.chunks_exact(g)) {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            for (o, &zk) in out.iter_mut().zip(z) {
                o.re += c.re * zk;
                o.im += c.im * zk;
            }
        }
        out
    }

    /// Galerkin application of `A_V` to a band-limited field.
    pub fn apply_operator(&self, u: &FieldState) -> Result<FieldState> {
        u.check_grid(self.grid())?;
        let cutoff = self.grid().plane_wave_cutoff();
        let vu: Vec<Complex64> = u.values().iter().zip(self.potential.values()).map(|(a, &v)| a * v).collect();
        let mut coeffs = self.fourier.forward(&vu);
        let mut u_hat = self.fourier.forward(u.values());
        self.fourier.band_limit(&mut u_hat, cutoff);
        for ((c, uh), k2) in coeffs.iter_mut().zip(&u_hat).zip(self.fourier.squared_wavenumbers()) {
            *c += uh * k2;
        }
        self.fourier.band_limit(&mut coeffs, cutoff);
        FieldState::new(self.grid(), self.fourier.inverse(&coeffs))
    }

    /// `⟨A_V^m u, u⟩` by repeated Galerkin application and grid quadrature.
    pub fn operator_form(&self, u: &FieldState, m: u32) -> Result<f64> {
        let mut left = u.clone();
        for _ in 0..m.div_ceil(2) {
            left = self.apply_operator(&left)?;
        }
        let mut right = u.clone();
        for _ in 0..m / 2 {
            right = self.apply_operator(&right)?;
        }
        Ok(left.inner(&right))
    }
}

/// Projects a field onto the basis: `v_k = ⟨u, ζ_k⟩`.
pub fn mode_transform(u: &FieldState, basis: &SpectralBasis) -> Result<ModeVector> {
    u.check_grid(basis.grid())?;
    Ok(ModeVector::new(basis.project(u.values())))
}

/// Reconstructs `u = Σ v_k ζ_k` on the basis grid.
pub fn mode_inverse(v: &ModeVector, basis: &SpectralBasis) -> Result<FieldState> {
    v.check_len(basis.truncation())?;
    FieldState::new(basis.grid(), basis.synthesize(v))
}

/// Weighted mode norm `|v|_p = (Σ |v_k|² λ_k^p)^{1/2}`.
pub fn hp_norm(v: &[Complex64], basis: &SpectralBasis, p: f64) -> f64 {
    v.iter().zip(basis.eigenvalues()).map(|(c, &l)| c.norm_sqr() * l.powf(p)).sum::<f64>().sqrt()
}

/// Least-squares power-law fit `λ_k ≈ prefactor · k^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct WeylFit {
    pub exponent: f64,
    pub prefactor: f64,
}

/// Fits `log λ_k` against `log k` over the upper half of the retained spectrum.
pub fn weyl_fit(basis: &SpectralBasis) -> Result<WeylFit> {
    let m = basis.truncation();
    if m < 16 {
        return Err(Error::InsufficientData(format!("Weyl fit needs at least 16 modes, got {m}")));
    }
    let pts: Vec<(f64, f64)> =
        (m / 2 + 1..=m).map(|k| ((k as f64).ln(), basis.eigenvalues()[k - 1].ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(WeylFit { exponent, prefactor: (my - exponent * mx).exp() })
}

/// Sobolev norm `||u||_p² = ⟨(-Δ)^p u, u⟩ + ⟨u, u⟩` for `p ≥ 1`; `||u||_0` is the `L²` norm.
pub fn sobolev_norm(u: &FieldState, p: u32) -> f64 {
    let fourier = FourierTransform::new(u.grid());
    let coeffs = fourier.forward(u.values());
    let sum: f64 = coeffs
        .iter()
        .zip(fourier.squared_wavenumbers())
        .map(|(c, k2)| {
            let weight = if p == 0 { 1.0 } else { k2.powi(p as i32) + 1.0 };
            c.norm_sqr() * weight
        })
        .sum();
    (u.grid().volume() * sum).sqrt()
}
