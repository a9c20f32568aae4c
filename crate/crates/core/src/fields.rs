//! The perturbation `𝒫` in field space and mode space, and the action/angle
//! vector fields `F_k`, `G_k`.

use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{FieldState, FourierTransform, ModeVector, SpectralBasis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    /// `Δu - γ_R f_p(|u|²) u - i γ_I f_q(|u|²) u`.
    Cgl,
    /// `-i γ_I f_q(|u|²) u`.
    CubicHamiltonian,
    Zero,
}

fn default_exponent() -> f64 {
    1.0
}

fn default_smoothing() -> f64 {
    1e-6
}

fn default_true() -> bool {
    true
}

/// Parameters of the perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    #[serde(default)]
    pub gamma_r: f64,
    #[serde(default)]
    pub gamma_i: f64,
    #[serde(default = "default_exponent")]
    pub exp_p: f64,
    #[serde(default = "default_exponent")]
    pub exp_q: f64,
    #[serde(default = "default_smoothing")]
    pub smoothing_radius: f64,
    #[serde(default = "default_true")]
    pub include_laplacian_dissipation: bool,
}

impl NonlinearitySpec {
    pub fn zero() -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            gamma_r: 0.0,
            gamma_i: 0.0,
            exp_p: 1.0,
            exp_q: 1.0,
            smoothing_radius: default_smoothing(),
            include_laplacian_dissipation: false,
        }
    }

    /// Cubic-type CGL with the `Δu` term included.
    pub fn cgl(gamma_r: f64, gamma_i: f64, exp_p: f64, exp_q: f64) -> Self {
        Self {
            kind: NonlinearityKind::Cgl,
            gamma_r,
            gamma_i,
            exp_p,
            exp_q,
            smoothing_radius: default_smoothing(),
            include_laplacian_dissipation: true,
        }
    }

    pub fn cubic_hamiltonian(gamma_i: f64) -> Self {
        Self { kind: NonlinearityKind::CubicHamiltonian, gamma_i, ..Self::zero() }
    }

    pub fn without_laplacian(mut self) -> Self {
        self.include_laplacian_dissipation = false;
        self
    }

    /// Rejects negative or non-finite parameters.
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &str, x: f64| {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("nonlinearity parameter {name} must be finite and >= 0, got {x}")))
            }
        };
        finite_nonneg("gamma_r", self.gamma_r)?;
        finite_nonneg("gamma_i", self.gamma_i)?;
        finite_nonneg("exp_p", self.exp_p)?;
        finite_nonneg("exp_q", self.exp_q)?;
        finite_nonneg("smoothing_radius", self.smoothing_radius)
    }

    /// Strict positivity of both damping constants, required for the a-priori
    /// bounds of the Ginzburg-Landau family (exponent range is unrestricted for `d ≤ 2`).
    pub fn check_cgl_conditions(&self, dim: usize) -> Result<()> {
        self.validate()?;
        if self.kind == NonlinearityKind::Cgl && !(self.gamma_r > 0.0 && self.gamma_i > 0.0) {
            return Err(Error::Config(format!(
                "cgl requires gamma_r > 0 and gamma_i > 0, got {} and {}",
                self.gamma_r, self.gamma_i
            )));
        }
        if dim > 2 {
            return Err(Error::Config("only d = 1, 2 are supported".into()));
        }
        Ok(())
    }

    /// `(Δ-term, γ_R, γ_I)` actually in effect for this kind.
    pub fn active_terms(&self) -> (bool, f64, f64) {
        match self.kind {
            NonlinearityKind::Zero => (false, 0.0, 0.0),
            NonlinearityKind::CubicHamiltonian => (false, 0.0, self.gamma_i),
            NonlinearityKind::Cgl => (self.include_laplacian_dissipation, self.gamma_r, self.gamma_i),
        }
    }

    fn with_terms(&self, laplacian: bool, gamma_r: f64, gamma_i: f64) -> Self {
        Self { kind: NonlinearityKind::Cgl, gamma_r, gamma_i, include_laplacian_dissipation: laplacian, ..self.clone() }
    }

    /// Only the `Δu` term.
    pub fn linear_part(&self) -> Self {
        let (lap, _, _) = self.active_terms();
        self.with_terms(lap, 0.0, 0.0)
    }

    /// Only `-γ_R f_p(|u|²) u`.
    pub fn dissipative_part(&self) -> Self {
        let (_, gr, _) = self.active_terms();
        self.with_terms(false, gr, 0.0)
    }

    /// Only `-i γ_I f_q(|u|²) u`.
    pub fn hamiltonian_part(&self) -> Self {
        let (_, _, gi) = self.active_terms();
        self.with_terms(false, 0.0, gi)
    }

    pub fn is_zero(&self) -> bool {
        let (lap, gr, gi) = self.active_terms();
        !lap && gr == 0.0 && gi == 0.0
    }

    pub fn dissipative_monomial(&self) -> SmoothedMonomial {
        SmoothedMonomial::new(self.exp_p, self.smoothing_radius)
    }

    pub fn hamiltonian_monomial(&self) -> SmoothedMonomial {
        SmoothedMonomial::new(self.exp_q, self.smoothing_radius)
    }

    /// Pointwise nonlinear factor `-(γ_R f_p(r) + i γ_I f_q(r))` at `r = |u|²`.
    fn nonlinear_factor(&self, r: f64, fp: &SmoothedMonomial, fq: &SmoothedMonomial) -> Complex64 {
        let (_, gr, gi) = self.active_terms();
        let re = if gr != 0.0 { -gr * fp.value(r) } else { 0.0 };
        let im = if gi != 0.0 { -gi * fq.value(r) } else { 0.0 };
        Complex64::new(re, im)
    }
}

/// `f(r) = r^p`, replaced on `[0, r₀]` by a quintic that vanishes to second
/// order at zero and matches value, slope and curvature at `r₀`.
///
/// Integer exponents are used unsmoothed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedMonomial {
    exponent: f64,
    radius: f64,
    /// Coefficients of `t³, t⁴, t⁵` with `t = r / r₀`.
    blend: [f64; 3],
}

impl SmoothedMonomial {
    pub fn new(exponent: f64, radius: f64) -> Self {
        let radius = if exponent.fract() == 0.0 { 0.0 } else { radius };
        let blend = if radius > 0.0 {
            let p = exponent;
            let y0 = radius.powf(p);
            let y1 = p * y0;
            let y2 = p * (p - 1.0) * y0;
            [10.0 * y0 - 4.0 * y1 + 0.5 * y2, -15.0 * y0 + 7.0 * y1 - y2, 6.0 * y0 - 3.0 * y1 + 0.5 * y2]
        } else {
            [0.0; 3]
        };
        Self { exponent, radius, blend }
    }

    pub fn value(&self, r: f64) -> f64 {
        if r < self.radius {
            let t = r / self.radius;
            let [a, b, c] = self.blend;
            t * t * t * (a + t * (b + t * c))
        } else if self.exponent == 0.0 {
            1.0
        } else if self.exponent == 1.0 {
            r
        } else {
            r.powf(self.exponent)
        }
    }

    /// `∫₀^r f(s) ds`.
    pub fn antiderivative(&self, r: f64) -> f64 {
        let q = self.exponent + 1.0;
        let [a, b, c] = self.blend;
        let blended = |t: f64| self.radius * t.powi(4) * (a / 4.0 + t * (b / 5.0 + t * c / 6.0));
        if r < self.radius {
            blended(r / self.radius)
        } else {
            blended(1.0) + (r.powf(q) - self.radius.powf(q)) / q
        }
    }
}

/// Pointwise perturbation `𝒫(Δu, ∇u, u, x)`.
pub trait Perturbation: Sync {
    fn evaluate(&self, laplacian: Complex64, gradient: [Complex64; 2], u: Complex64, x: [f64; 2]) -> Complex64;
}

impl Perturbation for NonlinearitySpec {
    fn evaluate(&self, laplacian: Complex64, _gradient: [Complex64; 2], u: Complex64, _x: [f64; 2]) -> Complex64 {
        let (lap, _, _) = self.active_terms();
        let fp = self.dissipative_monomial();
        let fq = self.hamiltonian_monomial();
        let linear = if lap { laplacian } else { Complex64::new(0.0, 0.0) };
        linear + self.nonlinear_factor(u.norm_sqr(), &fp, &fq) * u
    }
}

/// Evaluates an arbitrary pointwise perturbation on a grid field.
pub fn eval_field_rhs_with(u: &FieldState, perturbation: &dyn Perturbation) -> FieldState {
    let grid = u.grid();
    let fourier = FourierTransform::new(grid);
    let coeffs = fourier.forward(u.values());
    let laplacian = fourier.laplacian(u.values());
    let mut gradient = [vec![Complex64::new(0.0, 0.0); grid.len()], vec![Complex64::new(0.0, 0.0); grid.len()]];
    for (axis, g) in gradient.iter_mut().enumerate().take(grid.dim()) {
        let dc: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let m = grid.wavevector(idx);
                // Nyquist derivative of a real field is zero
                if m[axis].unsigned_abs() as usize * 2 == grid.points_per_axis() {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, m[axis] as f64)
                }
            })
            .collect();
        *g = fourier.inverse(&dc);
    }
    let values = (0..grid.len())
        .map(|i| perturbation.evaluate(laplacian[i], [gradient[0][i], gradient[1][i]], u.values()[i], grid.point(i)))
        .collect();
    FieldState::new(grid, values).expect("grid sizes agree")
}

/// Non-stiff right-hand side `Δu - γ_R f_p(|u|²) u - i γ_I f_q(|u|²) u` (terms per `spec`).
pub fn eval_field_rhs(u: &FieldState, spec: &NonlinearitySpec) -> FieldState {
    if spec.is_zero() {
        return FieldState::zeros(u.grid());
    }
    eval_field_rhs_with(u, spec)
}

/// Perturbation in mode coordinates, `P_k(v) = Ψ_k(𝒫(...))|_{u = Ψ^{-1} v}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeField(Vec<Complex64>);

impl ModeField {
    pub fn new(components: Vec<Complex64>) -> Self {
        Self(components)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn distance(&self, other: &[Complex64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Deref for ModeField {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// `P(v)` for a built-in spec. The `Δu` term goes through the mode-space
/// Laplacian, which equals the grid route on the Galerkin space.
pub fn eval_p(v: &[Complex64], spec: &NonlinearitySpec, basis: &SpectralBasis) -> ModeField {
    let m = basis.truncation();
    let (lap, gr, gi) = spec.active_terms();
    let mut out = if lap { basis.apply_laplacian(v) } else { vec![Complex64::new(0.0, 0.0); m] };
    if gr != 0.0 || gi != 0.0 {
        let fp = spec.dissipative_monomial();
        let fq = spec.hamiltonian_monomial();
        let mut u = basis.synthesize(v);
        for c in u.iter_mut() {
            *c *= spec.nonlinear_factor(c.norm_sqr(), &fp, &fq);
        }
        for (o, p) in out.iter_mut().zip(basis.project(&u)) {
            *o += p;
        }
    }
    ModeField(out)
}

/// `P(v)` for a user perturbation through the field-space route.
pub fn eval_p_with(v: &ModeVector, perturbation: &dyn Perturbation, basis: &SpectralBasis) -> Result<ModeField> {
    v.check_len(basis.truncation())?;
    let u = FieldState::new(basis.grid(), basis.synthesize(v))?;
    Ok(ModeField(basis.project(eval_field_rhs_with(&u, perturbation).values())))
}

/// Real pairing `(a, b) = Re(a b̄)`.
pub fn real_pairing(a: Complex64, b: Complex64) -> f64 {
    (a * b.conj()).re
}

/// Action field `F_k(v) = (v_k, P_k(v))`.
pub fn eval_f(v: &[Complex64], spec: &NonlinearitySpec, basis: &SpectralBasis) -> Vec<f64> {
    action_field_from(v, &eval_p(v, spec, basis))
}

pub(crate) fn action_field_from(v: &[Complex64], p: &[Complex64]) -> Vec<f64> {
    v.iter().zip(p).map(|(&a, &b)| real_pairing(a, b)).collect()
}

/// Angle field `G_k(v) = (P_k, i v_k) / |v_k|²`, masked (`None`) where `I_k < floor`.
pub fn eval_g(v: &[Complex64], spec: &NonlinearitySpec, basis: &SpectralBasis, floor: f64) -> Result<Vec<Option<f64>>> {
    if !(floor > 0.0) {
        return Err(Error::Config(format!("angle-field floor must be positive, got {floor}")));
    }
    let p = eval_p(v, spec, basis);
    Ok(v.iter()
        .zip(p.iter())
        .map(|(&vk, &pk)| {
            let n2 = vk.norm_sqr();
            if 0.5 * n2 < floor {
                None
            } else {
                Some(real_pairing(pk, Complex64::i() * vk) / n2)
            }
        })
        .collect())
}

/// `𝓗(u) = ∫ 𝓕(|u|²) dx` with `𝓕' = f_p / 2`, evaluated at `u = Ψ^{-1} v`.
///
/// Its gradient for the real pairing is `f_p(|u|²) u`.
pub fn dissipation_functional(v: &[Complex64], spec: &NonlinearitySpec, basis: &SpectralBasis) -> f64 {
    let fp = spec.dissipative_monomial();
    let w = basis.quadrature_weight();
    basis.synthesize(v).iter().map(|c| 0.5 * fp.antiderivative(c.norm_sqr())).sum::<f64>() * w
}
