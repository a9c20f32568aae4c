//! Angle averages over the torus `T^M`: partial and full averages, the
//! effective field `R(v) = ∫ Φ_{-θ} P(Φ_θ v) dθ` and its closed forms for
//! cubic Ginzburg-Landau perturbations.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action_angle::{lift, rotate_unchecked};
use crate::error::{Error, Result};
use crate::fields::{eval_p, real_pairing, ModeField, NonlinearityKind, NonlinearitySpec};
use crate::spectral::{Potential, SpectralBasis};

/// Largest number of simultaneously quadratured angles.
pub const MAX_QUADRATURE_ANGLES: usize = 4;
pub const DEFAULT_NODES_PER_ANGLE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageMethod {
    MonteCarlo,
    TensorQuadrature,
    ClosedForm,
}

/// Value of an average with its sampling error (zero for deterministic methods).
#[derive(Clone, Debug, PartialEq)]
pub struct AverageEstimate<T> {
    pub value: Vec<T>,
    pub std_error: Vec<f64>,
    pub samples: usize,
    pub method: AverageMethod,
}

impl AverageEstimate<Complex64> {
    pub fn into_field(self) -> ModeField {
        ModeField::new(self.value)
    }
}

/// Scalars that can be averaged.
pub trait Sample: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn sq_norm(self) -> f64;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn sq_norm(self) -> f64 {
        self * self
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn sq_norm(self) -> f64 {
        self.norm_sqr()
    }
}

/// Mean of ordered samples; summation order is the sample order.
fn reduce<T: Sample>(values: &[Vec<T>], method: AverageMethod) -> AverageEstimate<T> {
    let n = values.len();
    let width = values.first().map_or(0, Vec::len);
    let mut mean = vec![T::zero(); width];
    for row in values {
        for (m, x) in mean.iter_mut().zip(row) {
            *m = m.add(*x);
        }
    }
    mean.iter_mut().for_each(|m| *m = m.scale(1.0 / n as f64));
    let std_error = if method == AverageMethod::MonteCarlo && n > 1 {
        (0..width)
            .map(|k| {
                let ss: f64 = values.iter().map(|row| row[k].add(mean[k].scale(-1.0)).sq_norm()).sum();
                (ss / (n - 1) as f64 / n as f64).sqrt()
            })
            .collect()
    } else {
        vec![0.0; width]
    };
    AverageEstimate { value: mean, std_error, samples: n, method }
}

/// Rectangle-rule average over the first `n_angles` angles, `nodes_per_angle`
/// equispaced nodes each; exact for trigonometric polynomials of degree
/// below `nodes_per_angle` in every averaged angle.
pub fn partial_average<T, F>(f: F, v: &[Complex64], n_angles: usize, nodes_per_angle: usize) -> Result<AverageEstimate<T>>
where
    T: Sample,
    F: Fn(&[Complex64]) -> Vec<T> + Sync,
{
    if n_angles == 0 || n_angles > v.len().min(MAX_QUADRATURE_ANGLES) {
        return Err(Error::Config(format!(
            "tensor quadrature over {n_angles} angles exceeds budget min(M, {MAX_QUADRATURE_ANGLES}) with M = {}; use Monte Carlo",
            v.len()
        )));
    }
    if nodes_per_angle < 4 {
        return Err(Error::Config(format!("need at least 4 nodes per angle, got {nodes_per_angle}")));
    }
    let total = nodes_per_angle.pow(n_angles as u32);
    let step = TAU / nodes_per_angle as f64;
    let values: Vec<Vec<T>> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut theta = vec![0.0; v.len()];
            for t in theta.iter_mut().take(n_angles) {
                *t = (idx % nodes_per_angle) as f64 * step;
                idx /= nodes_per_angle;
            }
            f(&rotate_unchecked(v, &theta))
        })
        .collect();
    Ok(reduce(&values, AverageMethod::TensorQuadrature))
}

/// Uniform angles for sample `index` of the stream identified by `seed`.
///
/// Each sample owns a ChaCha stream, so results do not depend on how the
/// samples are partitioned across threads.
pub fn sample_angles(seed: u64, index: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..len).map(|_| rng.gen_range(0.0..TAU)).collect()
}

/// Monte-Carlo average of `f(Φ_θ v)` with `θ` uniform on `T^M`.
pub fn full_average_mc<T, F>(f: F, v: &[Complex64], samples: usize, seed: u64) -> Result<AverageEstimate<T>>
where
    T: Sample,
    F: Fn(&[Complex64]) -> Vec<T> + Sync,
{
    if samples < 16 {
        return Err(Error::Config(format!("Monte Carlo average needs at least 16 samples, got {samples}")));
    }
    let values: Vec<Vec<T>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| f(&rotate_unchecked(v, &sample_angles(seed, i, v.len()))))
        .collect();
    Ok(reduce(&values, AverageMethod::MonteCarlo))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Closed form when available, quadrature up to three modes, Monte Carlo beyond.
    #[default]
    Auto,
    ClosedForm,
    TensorQuadrature,
    MonteCarlo,
}

fn default_samples() -> usize {
    4096
}

fn default_nodes() -> usize {
    DEFAULT_NODES_PER_ANGLE
}

/// How angle averages are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AveragingBudget {
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_nodes")]
    pub nodes_per_angle: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for AveragingBudget {
    fn default() -> Self {
        Self { method: MethodChoice::Auto, samples: default_samples(), nodes_per_angle: default_nodes(), seed: 0 }
    }
}

impl AveragingBudget {
    pub fn quadrature(nodes_per_angle: usize) -> Self {
        Self { method: MethodChoice::TensorQuadrature, nodes_per_angle, ..Self::default() }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self { method: MethodChoice::MonteCarlo, samples, seed, ..Self::default() }
    }

    pub fn closed_form() -> Self {
        Self { method: MethodChoice::ClosedForm, ..Self::default() }
    }

    fn resolve_numeric(&self, modes: usize) -> AverageMethod {
        if modes <= 3 {
            AverageMethod::TensorQuadrature
        } else {
            AverageMethod::MonteCarlo
        }
    }

    /// Concrete method for a given spec and truncation.
    pub fn resolve(&self, spec: &NonlinearitySpec, modes: usize) -> Result<AverageMethod> {
        match self.method {
            MethodChoice::Auto if closed_form_supported(spec) => Ok(AverageMethod::ClosedForm),
            MethodChoice::Auto => Ok(self.resolve_numeric(modes)),
            MethodChoice::ClosedForm if closed_form_supported(spec) => Ok(AverageMethod::ClosedForm),
            MethodChoice::ClosedForm => Err(Error::Config(
                "closed-form averages need exponents in {0, 1} for every active nonlinear term".into(),
            )),
            MethodChoice::TensorQuadrature => Ok(AverageMethod::TensorQuadrature),
            MethodChoice::MonteCarlo => Ok(AverageMethod::MonteCarlo),
        }
    }
}

/// Closed forms exist when every active nonlinearity is `|u|^0 u` or `|u|² u`.
pub fn closed_form_supported(spec: &NonlinearitySpec) -> bool {
    let (_, gr, gi) = spec.active_terms();
    let ok = |gamma: f64, exponent: f64| gamma == 0.0 || exponent == 0.0 || exponent == 1.0;
    ok(gr, spec.exp_p) && ok(gi, spec.exp_q)
}

/// Diagonal `-λ_k + ⟨V ζ_k, ζ_k⟩` of the averaged `Δu` term, by grid quadrature.
pub fn cgl_effective_linear(basis: &SpectralBasis, potential: &Potential) -> Vec<f64> {
    let w = basis.quadrature_weight();
    (1..=basis.truncation())
        .map(|k| {
            let mk: f64 = w * basis.eigenfunction(k).iter().zip(potential.values()).map(|(z, v)| v * z * z).sum::<f64>();
            mk - basis.eigenvalues()[k - 1]
        })
        .collect()
}

/// Evaluator of the effective field for a fixed spec, basis and budget.
#[derive(Clone, Debug)]
pub struct EffectiveField<'a> {
    spec: NonlinearitySpec,
    basis: &'a SpectralBasis,
    budget: AveragingBudget,
    method: AverageMethod,
    /// Averaged `Δu` term, present only when that term is active.
    linear: Option<Vec<f64>>,
    /// `∫ ζ_k² ζ_c²`, row-major, for closed forms.
    quartic: Vec<f64>,
}

impl<'a> EffectiveField<'a> {
    pub fn new(spec: &NonlinearitySpec, basis: &'a SpectralBasis, budget: AveragingBudget) -> Result<Self> {
        spec.validate()?;
        let method = budget.resolve(spec, basis.truncation())?;
        let (lap, _, _) = spec.active_terms();
        let linear = lap.then(|| cgl_effective_linear(basis, basis.potential()));
        let quartic = if method == AverageMethod::ClosedForm { quartic_overlaps(basis) } else { Vec::new() };
        Ok(Self { spec: spec.clone(), basis, budget, method, linear, quartic })
    }

    pub fn method(&self) -> AverageMethod {
        self.method
    }

    /// Diagonal part integrated exactly by the effective-equation solver.
    pub fn linear_diagonal(&self) -> Vec<f64> {
        self.linear.clone().unwrap_or_else(|| vec![0.0; self.basis.truncation()])
    }

    /// `R(v)` with its estimator error.
    pub fn evaluate(&self, v: &[Complex64]) -> Result<AverageEstimate<Complex64>> {
        if v.len() != self.basis.truncation() {
            return Err(Error::Shape(format!("mode vector of length {} for M = {}", v.len(), self.basis.truncation())));
        }
        match self.method {
            AverageMethod::ClosedForm => Ok(AverageEstimate {
                value: self.closed_form(v, true, true, true),
                std_error: vec![0.0; v.len()],
                samples: 1,
                method: AverageMethod::ClosedForm,
            }),
            _ => self.numeric(&self.spec, v),
        }
    }

    /// `R(v) - diag(linear) v`: everything except the exactly integrated diagonal,
    /// leaving out the Hamiltonian part for Ginzburg-Landau (it only rotates phases).
    pub fn nonlinear_remainder(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let cgl = self.spec.kind == NonlinearityKind::Cgl;
        if self.method == AverageMethod::ClosedForm {
            return Ok(self.closed_form(v, false, true, !cgl));
        }
        let mut spec = self.spec.clone();
        if cgl {
            spec = NonlinearitySpec { gamma_i: 0.0, ..spec };
        }
        let r = self.numeric(&spec, v)?.value;
        let diag = self.linear_diagonal();
        Ok(r.iter().zip(v).zip(diag).map(|((r, x), d)| r - x * d).collect())
    }

    fn numeric(&self, spec: &NonlinearitySpec, v: &[Complex64]) -> Result<AverageEstimate<Complex64>> {
        let basis = self.basis;
        let integrand = |theta: &[f64]| {
            let p = eval_p(&rotate_unchecked(v, theta), spec, basis);
            p.iter().zip(theta).map(|(pk, t)| pk * Complex64::from_polar(1.0, -t)).collect::<Vec<_>>()
        };
        average_over_angles(v.len(), self.method, &self.budget, &integrand)
    }

    fn closed_form(&self, v: &[Complex64], linear: bool, dissipative: bool, hamiltonian: bool) -> Vec<Complex64> {
        let m = v.len();
        let (_, gr, gi) = self.spec.active_terms();
        let moduli: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
        let diag = self.linear_diagonal();
        (0..m)
            .map(|k| {
                let row = &self.quartic[k * m..(k + 1) * m];
                let cubic = 2.0 * row.iter().zip(&moduli).map(|(w, r)| w * r).sum::<f64>() - row[k] * moduli[k];
                let factor = |exponent: f64| if exponent == 0.0 { 1.0 } else { cubic };
                let mut coeff = Complex64::new(0.0, 0.0);
                if linear {
                    coeff.re += diag[k];
                }
                if dissipative && gr != 0.0 {
                    coeff.re -= gr * factor(self.spec.exp_p);
                }
                if hamiltonian && gi != 0.0 {
                    coeff.im -= gi * factor(self.spec.exp_q);
                }
                coeff * v[k]
            })
            .collect()
    }
}

/// Average of `integrand(θ)` over `T^m` by quadrature or Monte Carlo.
fn average_over_angles(
    m: usize,
    method: AverageMethod,
    budget: &AveragingBudget,
    integrand: &(dyn Fn(&[f64]) -> Vec<Complex64> + Sync),
) -> Result<AverageEstimate<Complex64>> {
    if method == AverageMethod::MonteCarlo {
        if budget.samples < 16 {
            return Err(Error::Config(format!("Monte Carlo average needs at least 16 samples, got {}", budget.samples)));
        }
        let values: Vec<Vec<Complex64>> =
            (0..budget.samples as u64).into_par_iter().map(|i| integrand(&sample_angles(budget.seed, i, m))).collect();
        return Ok(reduce(&values, AverageMethod::MonteCarlo));
    }
    if m > MAX_QUADRATURE_ANGLES {
        return Err(Error::Config(format!(
            "tensor quadrature over all {m} angles exceeds budget of {MAX_QUADRATURE_ANGLES}; use Monte Carlo"
        )));
    }
    let nodes = budget.nodes_per_angle;
    if nodes < 4 {
        return Err(Error::Config(format!("need at least 4 nodes per angle, got {nodes}")));
    }
    let step = TAU / nodes as f64;
    let values: Vec<Vec<Complex64>> = (0..nodes.pow(m as u32))
        .into_par_iter()
        .map(|mut idx| {
            let theta: Vec<f64> = (0..m)
                .map(|_| {
                    let t = (idx % nodes) as f64 * step;
                    idx /= nodes;
                    t
                })
                .collect();
            integrand(&theta)
        })
        .collect();
    Ok(reduce(&values, AverageMethod::TensorQuadrature))
}

fn quartic_overlaps(basis: &SpectralBasis) -> Vec<f64> {
    let m = basis.truncation();
    let w = basis.quadrature_weight();
    let mut out = vec![0.0; m * m];
    for k in 0..m {
        for c in k..m {
            let val = w * basis
                .eigenfunction(k + 1)
                .iter()
                .zip(basis.eigenfunction(c + 1))
                .map(|(a, b)| a * a * b * b)
                .sum::<f64>();
            out[k * m + c] = val;
            out[c * m + k] = val;
        }
    }
    out
}

/// `R(v)` for `spec` under `budget`.
pub fn effective_field(
    v: &[Complex64],
    spec: &NonlinearitySpec,
    basis: &SpectralBasis,
    budget: AveragingBudget,
) -> Result<AverageEstimate<Complex64>> {
    EffectiveField::new(spec, basis, budget)?.evaluate(v)
}

/// Averaged action field `⟨F_k⟩(I) = (v_k, R_k(v))` at `v = lift(I, 0)`.
pub fn averaged_action_field(actions: &[f64], field: &EffectiveField<'_>) -> Result<Vec<f64>> {
    let v = lift(actions, &vec![0.0; actions.len()])?;
    let r = field.evaluate(&v)?;
    Ok(v.iter().zip(&r.value).map(|(a, b)| real_pairing(*a, *b)).collect())
}

/// `max_k |(v_k, R³_k(v))|` where `R³` averages the Hamiltonian part alone.
///
/// Always evaluated numerically (quadrature when `M ≤ 4`, else Monte Carlo)
/// so the result is an independent check rather than a consequence of the closed form.
pub fn verify_r3_null(v: &[Complex64], spec: &NonlinearitySpec, basis: &SpectralBasis, budget: AveragingBudget) -> Result<f64> {
    if spec.kind != NonlinearityKind::Cgl {
        return Err(Error::Config("R3 nullity check applies to cgl specs".into()));
    }
    let hamiltonian = spec.hamiltonian_part();
    if hamiltonian.gamma_i == 0.0 {
        return Ok(0.0);
    }
    let method = match budget.method {
        MethodChoice::MonteCarlo => MethodChoice::MonteCarlo,
        _ if basis.truncation() <= MAX_QUADRATURE_ANGLES => MethodChoice::TensorQuadrature,
        _ => MethodChoice::MonteCarlo,
    };
    let field = EffectiveField::new(&hamiltonian, basis, AveragingBudget { method, ..budget })?;
    let r3 = field.evaluate(v)?;
    Ok(v.iter().zip(&r3.value).map(|(a, b)| real_pairing(*a, *b).abs()).fold(0.0, f64::max))
}
