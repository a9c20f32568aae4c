use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::SimulationConfig;
use super::resonance::{resonance_scan, resonance_scan_values, Verdict};
use super::study::convergence_study;
use super::weyl::{weyl_average_test, TrigPolynomial};
use crate::action_angle::{actions, lift, rotate, AngleVector};
use crate::averaging::{cgl_effective_linear, effective_field, full_average_mc, verify_r3_null, AveragingBudget};
use crate::dynamics::{dissipation_check, integrate_effective, integrate_perturbed, IntegratorConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::fields::{eval_f, real_pairing, NonlinearitySpec};
use crate::spectral::{assemble_operator, hp_norm, mode_inverse, Grid, ModeVector, Potential, PotentialSpec, SpectralBasis};

/// Tolerance file shipped with the crate.
pub const DEFAULT_TOLERANCES: &str = include_str!("../../tolerances.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceAnchors {
    pub dt_slow: f64,
    pub epsilon: Vec<f64>,
    pub sup_err_q0: Vec<f64>,
    pub sup_xi: Vec<f64>,
    pub a_priori_bound: f64,
    pub relative_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub spectral_relative: f64,
    pub orthonormality: f64,
    pub norm_identity_relative: f64,
    pub linear_action_drift: f64,
    pub averaging_sigmas: f64,
    pub equivariance: f64,
    pub closed_form_linear: f64,
    pub constant_potential_linear: f64,
    pub r3_null: f64,
    pub dissipation_min_order: f64,
    pub bound_slack: f64,
    pub convergence_max_ratio: f64,
    pub lifting_factor: f64,
    pub weyl_gap_constant: f64,
    pub resonance_tolerance: f64,
    pub reference: ReferenceAnchors,
}

impl Tolerances {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("tolerance file: {e}")))
    }

    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_TOLERANCES).expect("shipped tolerance file parses")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.to_string(), passed, detail }
}

fn basis_1d(n: usize, m: usize, spec: PotentialSpec) -> Result<SpectralBasis> {
    assemble_operator(&Potential::new(spec, Grid::new(1, n)?)?, m)
}

fn reference_potential() -> PotentialSpec {
    PotentialSpec::trig_1d(1.0, &[(1, 0.5, 0.0), (2, 0.0, 0.3)])
}

fn random_modes(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex64> {
    (0..m).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn cubic() -> NonlinearitySpec {
    NonlinearitySpec::cgl(1.0, 1.0, 1.0, 1.0)
}

fn spectral_exactness(tol: &Tolerances) -> Result<CheckOutcome> {
    let basis = basis_1d(128, 32, PotentialSpec::constant(1.0))?;
    let mut expected = vec![1.0];
    for k in 1.. {
        if expected.len() >= 32 {
            break;
        }
        expected.extend([1.0 + (k * k) as f64; 2]);
    }
    let rel = basis.eigenvalues().iter().zip(&expected).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
    let ortho = basis.orthonormality_residual();
    Ok(outcome(
        "spectral exactness",
        rel <= tol.spectral_relative && ortho <= tol.orthonormality,
        format!("max relative error {rel:.3e}, orthonormality residual {ortho:.3e}"),
    ))
}

fn norm_identity(tol: &Tolerances) -> Result<CheckOutcome> {
    let basis = basis_1d(64, 16, reference_potential())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let v = ModeVector::new(random_modes(&mut rng, 16));
        let u = mode_inverse(&v, &basis)?;
        for m in 0..=2u32 {
            let exact = hp_norm(&v, &basis, m as f64).powi(2);
            worst = worst.max((basis.operator_form(&u, m)? - exact).abs() / exact);
        }
    }
    Ok(outcome("norm identity", worst <= tol.norm_identity_relative, format!("max relative error {worst:.3e}")))
}

fn linear_conservation(tol: &Tolerances) -> Result<CheckOutcome> {
    let basis = basis_1d(64, 16, reference_potential())?;
    let v0 = ModeVector::new(random_modes(&mut ChaCha8Rng::seed_from_u64(3), 16));
    let traj = integrate_perturbed(&v0, &NonlinearitySpec::zero(), &basis, &IntegratorConfig::new(1.0 / 1024.0, 0.01))?;
    let drift = traj.actions.iter().map(|i| i.sup_distance(&traj.actions[0])).fold(0.0, f64::max);
    Ok(outcome("linear conservation", drift <= tol.linear_action_drift, format!("max action drift {drift:.3e}")))
}

fn averaging_identity(tol: &Tolerances) -> Result<CheckOutcome> {
    let basis = basis_1d(32, 3, reference_potential())?;
    let v = random_modes(&mut ChaCha8Rng::seed_from_u64(4), 3);
    let mc = full_average_mc(|w: &[Complex64]| eval_f(w, &cubic(), &basis), &v, 10_000, 4)?;
    let r = effective_field(&v, &cubic(), &basis, AveragingBudget::quadrature(8))?;
    let worst = (0..3)
        .map(|k| (mc.value[k] - real_pairing(v[k], r.value[k])).abs() / mc.std_error[k].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(outcome("averaging identity", worst <= tol.averaging_sigmas, format!("worst deviation {worst:.2} standard errors")))
}

fn rotation_equivariance(tol: &Tolerances) -> Result<CheckOutcome> {
    let basis = basis_1d(32, 3, reference_potential())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let v = random_modes(&mut rng, 3);
        let theta: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let lhs = effective_field(&rotate(&v, &theta)?, &cubic(), &basis, AveragingBudget::quadrature(8))?.value;
        let rhs = rotate(&effective_field(&v, &cubic(), &basis, AveragingBudget::quadrature(8))?.value, &theta)?;
        worst = worst.max(hp_norm(&lhs.iter().zip(rhs.iter()).map(|(a, b)| a - b).collect::<Vec<_>>(), &basis, 0.0));
    }
    Ok(outcome("effective rotation equivariance", worst <= tol.equivariance, format!("max |R(Φv) - ΦR(v)|_0 = {worst:.3e}")))
}

fn closed_form_linear(tol: &Tolerances) -> Result<CheckOutcome> {
    let linear = NonlinearitySpec::cgl(0.0, 0.0, 1.0, 1.0);
    let basis = basis_1d(32, 3, reference_potential())?;
    let diag = cgl_effective_linear(&basis, basis.potential());
    let mut worst = 0.0_f64;
    for k in 1..=3 {
        let r = effective_field(&ModeVector::unit(3, k), &linear, &basis, AveragingBudget::quadrature(8))?.value;
        for (j, rj) in r.iter().enumerate() {
            let want = if j + 1 == k { diag[j] } else { 0.0 };
            worst = worst.max((rj - want).norm());
        }
    }
    let flat = basis_1d(32, 5, PotentialSpec::constant(1.0))?;
    let flat_err = cgl_effective_linear(&flat, flat.potential())
        .iter()
        .zip(flat.eigenvalues())
        .map(|(d, l)| (d - (1.0 - l)).abs())
        .fold(0.0, f64::max);
    Ok(outcome(
        "closed-form linear part",
        worst <= tol.closed_form_linear && flat_err <= tol.constant_potential_linear,
        format!("basis-vector mismatch {worst:.3e}, constant-potential mismatch {flat_err:.3e}"),
    ))
}

fn r3_nullity(tol: &Tolerances) -> Result<CheckOutcome> {
    let basis = basis_1d(32, 3, reference_potential())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        worst = worst.max(verify_r3_null(&random_modes(&mut rng, 3), &cubic(), &basis, AveragingBudget::quadrature(8))?);
    }
    Ok(outcome("R3 nullity", worst <= tol.r3_null, format!("max |(v_k, R3_k)| = {worst:.3e}")))
}

fn dissipation(tol: &Tolerances) -> Result<CheckOutcome> {
    let cfg = SimulationConfig::reference();
    let basis = cfg.basis()?;
    let v0 = cfg.initial_condition.mode_vector(&basis)?;
    let mut residuals = Vec::new();
    let mut bound_ok = true;
    for dt in [1.0 / 2048.0, 1.0 / 4096.0] {
        let run = IntegratorConfig::new(dt, 0.1).with_horizon(0.25).with_record_every(1);
        let traj = integrate_perturbed(&v0, &cfg.nonlinearity, &basis, &run)?;
        let report = dissipation_check(&traj, &cfg.nonlinearity, &basis)?;
        bound_ok &= report.norm0.iter().zip(&report.bound).all(|(n, b)| *n <= b + tol.bound_slack);
        residuals.push(report.max_residual());
    }
    let order = (residuals[0] / residuals[1]).log2();
    Ok(outcome(
        "dissipation identity and bound",
        order >= tol.dissipation_min_order && bound_ok,
        format!("observed order {order:.2}, bound holds: {bound_ok}"),
    ))
}

fn theorem_convergence(tol: &Tolerances) -> Result<CheckOutcome> {
    let anchors = &tol.reference;
    let mut cfg = SimulationConfig::reference();
    cfg.integrator.dt_slow = anchors.dt_slow;
    cfg.epsilon_sweep = anchors.epsilon.clone();
    let (report, _) = convergence_study(&cfg, false)?;
    let errs: Vec<f64> = report.rows.iter().map(|r| r.sup_err_q0.unwrap_or(f64::NAN)).collect();
    let xis: Vec<f64> = report.rows.iter().map(|r| r.sup_xi).collect();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let anchored = errs.iter().zip(&anchors.sup_err_q0).chain(xis.iter().zip(&anchors.sup_xi)).all(|(a, b)| rel(*a, *b) <= anchors.relative_tolerance)
        && rel(report.a_priori_bound, anchors.a_priori_bound) <= anchors.relative_tolerance;
    let ratio = report.err_ratio_last_first.unwrap_or(f64::NAN);
    let passed = report.err_strictly_decreasing == Some(true)
        && ratio <= tol.convergence_max_ratio
        && report.xi_decreasing == Some(true)
        && anchored;
    Ok(outcome(
        "convergence of actions",
        passed,
        format!("e = {}, ratio {ratio:.3}, sup xi = {}, anchors match: {anchored}", sci(&errs), sci(&xis)),
    ))
}

fn action_curve_gap(a: &TrajectoryRecord, b: &TrajectoryRecord) -> f64 {
    a.actions.iter().zip(&b.actions).map(|(x, y)| x.sup_distance(y)).fold(0.0, f64::max)
}

fn lifting_consistency(tol: &Tolerances) -> Result<CheckOutcome> {
    let cfg = SimulationConfig::reference();
    let basis = cfg.basis()?;
    let i0 = actions(&random_modes(&mut ChaCha8Rng::seed_from_u64(10), 16)).into_inner();
    let run = |theta: &[f64], dt: f64| -> Result<TrajectoryRecord> {
        let v0 = lift(&i0, theta)?;
        integrate_effective(&v0, &cfg.nonlinearity, &basis, &IntegratorConfig::new(dt, 1.0).with_record_every(1usize.max((1.0 / (64.0 * dt)) as usize)), cfg.averaging)
    };
    let theta: Vec<f64> = (0..16).map(|k| 0.37 * k as f64).collect();
    let base = run(&[0.0; 16], 1.0 / 512.0)?;
    let other = run(&theta, 1.0 / 512.0)?;
    let half = run(&[0.0; 16], 1.0 / 1024.0)?;
    // step-halving difference stands in for the integrator tolerance
    let integrator_tol = action_curve_gap(&base, &half);
    let gap = action_curve_gap(&base, &other);
    Ok(outcome(
        "lifting consistency",
        gap <= tol.lifting_factor * integrator_tol,
        format!("lift gap {gap:.3e}, integrator tolerance {integrator_tol:.3e}"),
    ))
}

fn weyl(tol: &Tolerances) -> Result<CheckOutcome> {
    let x0 = AngleVector::new([0.3, 1.1]);
    let rows = weyl_average_test(&[1.0, SQRT_2], &TrigPolynomial::single(vec![1, 0], 1.0, 0.0), &x0, &[10.0, 100.0, 1000.0])?;
    let decays = rows.iter().all(|r| r.gap <= tol.weyl_gap_constant / r.horizon && r.haar_average == 0.0);
    let resonant = weyl_average_test(&[1.0, 1.0], &TrigPolynomial::single(vec![1, -1], 1.0, 0.0), &x0, &[10.0, 1000.0])?;
    let stuck = resonant.iter().all(|r| (r.gap - (0.3f64 - 1.1).cos().abs()).abs() < 1e-9);
    Ok(outcome("Weyl average", decays && stuck, format!("gaps {}, resonant gap stays: {stuck}", sci(&rows.iter().map(|r| r.gap).collect::<Vec<_>>()))))
}

fn resonance(tol: &Tolerances) -> Result<CheckOutcome> {
    let planted = resonance_scan_values(&[1.0, 2.0, 3.0], 1, tol.resonance_tolerance)?;
    let planted_ok = planted.best_value == 0.0 && planted.verdict == Verdict::Resonant;
    let flat = resonance_scan(&basis_1d(32, 6, PotentialSpec::constant(1.0))?, 6, 3, tol.resonance_tolerance)?;
    let mut resonant_random = 0;
    let mut smallest = f64::INFINITY;
    for seed in 0..20 {
        let basis = basis_1d(64, 16, PotentialSpec::RandomTrig { seed, degree: 3, amplitude: 0.5 })?;
        let report = resonance_scan(&basis, 6, 3, tol.resonance_tolerance)?;
        smallest = smallest.min(report.best_value);
        if report.verdict == Verdict::Resonant {
            resonant_random += 1;
        }
    }
    Ok(outcome(
        "resonance scanner",
        planted_ok && flat.verdict == Verdict::Resonant && resonant_random == 0,
        format!("planted witness {:?}, smallest random value {smallest:.3e}, resonant random potentials {resonant_random}", planted.best_vector),
    ))
}

/// Runs every check; numerical failures inside a check count as a failed check.
pub fn run_selftest(tol: &Tolerances) -> Vec<CheckOutcome> {
    type Check = fn(&Tolerances) -> Result<CheckOutcome>;
    let checks: [(&str, Check); 12] = [
        ("spectral exactness", spectral_exactness),
        ("norm identity", norm_identity),
        ("linear conservation", linear_conservation),
        ("averaging identity", averaging_identity),
        ("effective rotation equivariance", rotation_equivariance),
        ("closed-form linear part", closed_form_linear),
        ("R3 nullity", r3_nullity),
        ("dissipation identity and bound", dissipation),
        ("convergence of actions", theorem_convergence),
        ("lifting consistency", lifting_consistency),
        ("Weyl average", weyl),
        ("resonance scanner", resonance),
    ];
    checks
        .iter()
        .map(|(name, check)| check(tol).unwrap_or_else(|e| outcome(name, false, format!("error: {e}"))))
        .collect()
}
