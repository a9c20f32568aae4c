use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{IntegratorConfig, Scheme, TrajectoryKind, TrajectoryRecord, TrajectoryStatus};
use crate::action_angle::{actions, ActionVector};
use crate::averaging::{AveragingBudget, EffectiveField};
use crate::error::{Error, Result};
use crate::fields::{eval_p, NonlinearitySpec};
use crate::spectral::{hp_norm, ModeVector, SpectralBasis};

const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 16;

fn series(z: Complex64, shift: u32) -> Complex64 {
    // Σ z^n / (n + shift)!
    let mut term = Complex64::new(1.0, 0.0);
    for j in 1..=shift {
        term /= j as f64;
    }
    let mut sum = term;
    for n in 1..SERIES_TERMS {
        term *= z / (n as f64 + shift as f64);
        sum += term;
    }
    sum
}

/// `φ₁(z) = (e^z - 1) / z`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        series(z, 1)
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `φ₂(z) = (e^z - 1 - z) / z²`.
pub fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        series(z, 2)
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// Precomputed diagonal factors for one ETD2RK step of size `h`.
struct EtdCoefficients {
    exp: Vec<Complex64>,
    phi1: Vec<Complex64>,
    phi2: Vec<Complex64>,
    h: f64,
}

impl EtdCoefficients {
    fn new(linear: &[Complex64], h: f64) -> Self {
        let z: Vec<Complex64> = linear.iter().map(|l| l * h).collect();
        Self {
            exp: z.iter().map(|z| z.exp()).collect(),
            phi1: z.iter().copied().map(phi1).collect(),
            phi2: z.iter().copied().map(phi2).collect(),
            h,
        }
    }

    fn step(&self, v: &[Complex64], n: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>) -> Result<Vec<Complex64>> {
        let nv = n(v)?;
        let a: Vec<Complex64> = (0..v.len()).map(|k| self.exp[k] * v[k] + self.h * self.phi1[k] * nv[k]).collect();
        let na = n(&a)?;
        Ok((0..v.len()).map(|k| a[k] + self.h * self.phi2[k] * (na[k] - nv[k])).collect())
    }
}

fn heun(v: &[Complex64], h: f64, f: &dyn Fn(&[Complex64]) -> Vec<Complex64>) -> Vec<Complex64> {
    let k1 = f(v);
    let w: Vec<Complex64> = v.iter().zip(&k1).map(|(a, b)| a + h * b).collect();
    let k2 = f(&w);
    (0..v.len()).map(|k| v[k] + 0.5 * h * (k1[k] + k2[k])).collect()
}

fn push_record(rec: &mut TrajectoryRecord, tau: f64, v: Vec<Complex64>, basis: &SpectralBasis) {
    let norms = [hp_norm(&v, basis, 0.0), hp_norm(&v, basis, 1.0), hp_norm(&v, basis, 2.0)];
    rec.times.push(tau);
    rec.actions.push(actions(&v));
    rec.norms.push(norms);
    rec.diagnostics.entry("mass".into()).or_default().push(norms[0] * norms[0]);
    rec.states.push(ModeVector::new(v));
}

/// Shared driver: checks, stepping, recording and blow-up handling.
fn drive(
    kind: TrajectoryKind,
    v0: &ModeVector,
    basis: &SpectralBasis,
    cfg: &IntegratorConfig,
    step: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    v0.check_len(basis.truncation())?;
    if !v0.is_finite() {
        return Err(Error::Domain("initial mode vector has non-finite entries".into()));
    }
    let initial = hp_norm(v0, basis, 2.0);
    if initial >= cfg.blowup_threshold {
        return Err(Error::Diverged {
            tau: 0.0,
            detail: format!("initial |v|_2 = {initial} is not below blowup_threshold {}", cfg.blowup_threshold),
        });
    }
    let (n, h) = cfg.steps();
    let stride = cfg.record_stride();
    let mut rec = TrajectoryRecord {
        kind,
        config: cfg.clone(),
        times: Vec::with_capacity(n / stride + 2),
        states: Vec::new(),
        actions: Vec::new(),
        norms: Vec::new(),
        diagnostics: BTreeMap::new(),
        status: TrajectoryStatus::Completed,
    };
    push_record(&mut rec, 0.0, v0.to_vec(), basis);
    let mut v = v0.to_vec();
    for i in 1..=n {
        v = step(&v)?;
        let tau = if i == n { cfg.t_slow } else { i as f64 * h };
        if v.iter().any(|c| c.re.is_nan() || c.im.is_nan()) {
            return Err(Error::Numerical(format!("NaN in state at tau = {tau}")));
        }
        let norm2 = hp_norm(&v, basis, 2.0);
        if !(norm2 < cfg.blowup_threshold) {
            push_record(&mut rec, tau, v, basis);
            rec.status = TrajectoryStatus::Diverged { tau };
            return Ok(rec);
        }
        if i % stride == 0 || i == n {
            push_record(&mut rec, tau, v.clone(), basis);
        }
    }
    Ok(rec)
}

/// Integrates `v̇ = -iε⁻¹Λv + P(v)` over `[0, T]` in slow time.
pub fn integrate_perturbed(
    v0: &ModeVector,
    spec: &NonlinearitySpec,
    basis: &SpectralBasis,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryRecord> {
    spec.validate()?;
    cfg.validate()?;
    let (_, h) = cfg.steps();
    let eps = cfg.epsilon;
    let linear: Vec<Complex64> = basis.eigenvalues().iter().map(|l| Complex64::new(0.0, -l / eps)).collect();
    let p = |w: &[Complex64]| eval_p(w, spec, basis).into_inner();
    match cfg.scheme {
        Scheme::StrangExactPhase => {
            let half: Vec<Complex64> = linear.iter().map(|l| (l * (0.5 * h)).exp()).collect();
            let step = |w: &[Complex64]| {
                let a: Vec<Complex64> = w.iter().zip(&half).map(|(x, e)| x * e).collect();
                let b = heun(&a, h, &p);
                Ok(b.iter().zip(&half).map(|(x, e)| x * e).collect())
            };
            drive(TrajectoryKind::Perturbed, v0, basis, cfg, &step)
        }
        Scheme::EtdRk2 => {
            let etd = EtdCoefficients::new(&linear, h);
            let n = |w: &[Complex64]| Ok(p(w));
            drive(TrajectoryKind::Perturbed, v0, basis, cfg, &|w| etd.step(w, &n))
        }
    }
}

/// Integrates the effective equation `v̇ = R(v)`: the averaged `Δu` diagonal is
/// advanced exactly, the rest by ETD2RK. For Ginzburg-Landau the Hamiltonian
/// average is left out since it only rotates phases.
pub fn integrate_effective(
    v0: &ModeVector,
    spec: &NonlinearitySpec,
    basis: &SpectralBasis,
    cfg: &IntegratorConfig,
    budget: AveragingBudget,
) -> Result<TrajectoryRecord> {
    let field = EffectiveField::new(spec, basis, budget)?;
    cfg.validate()?;
    let (_, h) = cfg.steps();
    let linear: Vec<Complex64> = field.linear_diagonal().into_iter().map(|d| Complex64::new(d, 0.0)).collect();
    let etd = EtdCoefficients::new(&linear, h);
    let n = |w: &[Complex64]| field.nonlinear_remainder(w);
    drive(TrajectoryKind::Effective, v0, basis, cfg, &|w| etd.step(w, &n))
}

/// Action curve `I⁰(τ)` of an effective trajectory.
pub fn averaged_actions(traj: &TrajectoryRecord) -> Vec<ActionVector> {
    traj.actions.clone()
}
