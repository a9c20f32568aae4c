use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TrajectoryRecord;
use crate::averaging::{averaged_action_field, AveragingBudget, EffectiveField};
use crate::error::{Error, Result};
use crate::fields::{NonlinearityKind, NonlinearitySpec};
use crate::spectral::{hp_norm, SpectralBasis};

/// `Ξ_k(τ_j) = I_k(τ_j) - I_k(0) - ∫₀^τ_j ⟨F_k⟩(I(s)) ds`, trapezoid on the records.
///
/// Returned per record, per mode. `seed` overrides the budget seed.
pub fn residual_xi(
    traj: &TrajectoryRecord,
    spec: &NonlinearitySpec,
    basis: &SpectralBasis,
    budget: AveragingBudget,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let m = basis.truncation();
    if spec.is_zero() {
        return Ok(traj.actions.iter().map(|i| i.iter().zip(traj.actions[0].iter()).map(|(a, b)| a - b).collect()).collect());
    }
    let field = EffectiveField::new(spec, basis, AveragingBudget { seed, ..budget })?;
    let rates: Vec<Vec<f64>> =
        traj.actions.par_iter().map(|i| averaged_action_field(i, &field)).collect::<Result<Vec<_>>>()?;
    let mut integral = vec![0.0; m];
    let mut out = Vec::with_capacity(traj.len());
    for j in 0..traj.len() {
        if j > 0 {
            let h = traj.times[j] - traj.times[j - 1];
            for k in 0..m {
                integral[k] += 0.5 * h * (rates[j - 1][k] + rates[j][k]);
            }
        }
        out.push((0..m).map(|k| traj.actions[j][k] - traj.actions[0][k] - integral[k]).collect());
    }
    Ok(out)
}

/// `max_τ |Ξ(τ)|~_0 = max_τ 2 Σ_k |Ξ_k(τ)|`.
pub fn xi_sup_norm(xi: &[Vec<f64>]) -> f64 {
    xi.iter().map(|row| 2.0 * row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Right side `2⟨Δu, u⟩ - 2γ_R ∫ f_p(|u|²)|u|²` of the `L²` balance at `u = Ψ⁻¹v`.
pub fn dissipation_rhs(v: &[Complex64], spec: &NonlinearitySpec, basis: &SpectralBasis) -> f64 {
    let (lap, gr, _) = spec.active_terms();
    let mut rhs = 0.0;
    if lap {
        rhs += 2.0 * v.iter().zip(basis.apply_laplacian(v)).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
    }
    if gr != 0.0 {
        let fp = spec.dissipative_monomial();
        let w = basis.quadrature_weight();
        let integral: f64 = basis
            .synthesize(v)
            .iter()
            .map(|c| {
                let r = c.norm_sqr();
                fp.value(r) * r
            })
            .sum::<f64>()
            * w;
        rhs -= 2.0 * gr * integral;
    }
    rhs
}

/// Discrete check of the `L²` balance and of the bound `||u||₀ ≤ min{B₂, e^τ||u₀||₀}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    /// Interior record times where the centred difference is taken.
    pub interior_times: Vec<f64>,
    /// Three-point `d/dτ ||u||₀²` minus the balance's right side.
    pub residual: Vec<f64>,
    /// `B₂ = γ_R^{-1/(2p)}`, infinite when `p = 0` or `γ_R = 0`.
    pub b2: f64,
    pub norm0: Vec<f64>,
    pub bound: Vec<f64>,
    pub bound_holds: Vec<bool>,
}

impl DissipationReport {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |a, r| a.max(r.abs()))
    }

    pub fn bound_always_holds(&self) -> bool {
        self.bound_holds.iter().all(|&b| b)
    }
}

pub const BOUND_SLACK: f64 = 1e-8;

pub fn dissipation_check(traj: &TrajectoryRecord, spec: &NonlinearitySpec, basis: &SpectralBasis) -> Result<DissipationReport> {
    if spec.kind != NonlinearityKind::Cgl || !spec.include_laplacian_dissipation {
        return Err(Error::Config("dissipation check needs a cgl spec with the Laplacian term".into()));
    }
    let t = &traj.times;
    let mass: Vec<f64> = traj.states.iter().map(|v| v.iter().map(|c| c.norm_sqr()).sum()).collect();
    let mut interior_times = Vec::new();
    let mut residual = Vec::new();
    for j in 1..traj.len().saturating_sub(1) {
        let (h1, h2) = (t[j] - t[j - 1], t[j + 1] - t[j]);
        let derivative = -h2 / (h1 * (h1 + h2)) * mass[j - 1] + (h2 - h1) / (h1 * h2) * mass[j] + h1 / (h2 * (h1 + h2)) * mass[j + 1];
        interior_times.push(t[j]);
        residual.push(derivative - dissipation_rhs(&traj.states[j], spec, basis));
    }
    let b2 = if spec.gamma_r > 0.0 && spec.exp_p > 0.0 { spec.gamma_r.powf(-1.0 / (2.0 * spec.exp_p)) } else { f64::INFINITY };
    let norm0: Vec<f64> = traj.states.iter().map(|v| hp_norm(v, basis, 0.0)).collect();
    let bound: Vec<f64> = t.iter().map(|tau| b2.min(tau.exp() * norm0[0])).collect();
    let bound_holds = norm0.iter().zip(&bound).map(|(n, b)| *n <= b + BOUND_SLACK).collect();
    Ok(DissipationReport { interior_times, residual, b2, norm0, bound, bound_holds })
}
