use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::action_angle::{actions, lift, rotate};
use crate::averaging::{effective_field, AveragingBudget};
use crate::fields::{real_pairing, NonlinearitySpec};
use crate::spectral::{assemble_operator, hp_norm, Grid, Potential, PotentialSpec, SpectralBasis};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn basis(spec: PotentialSpec, n: usize, m: usize) -> SpectralBasis {
    let grid = Grid::new(1, n).unwrap();
    assemble_operator(&Potential::new(spec, grid).unwrap(), m).unwrap()
}

fn cos_basis() -> SpectralBasis {
    basis(PotentialSpec::trig_1d(1.0, &[(1, 0.5, 0.0)]), 32, 8)
}

fn random_v0(seed: u64, m: usize, scale: f64) -> ModeVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ModeVector::new((0..m).map(|k| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)) / (1.0 + k as f64)).collect())
}

fn cubic() -> NonlinearitySpec {
    NonlinearitySpec::cgl(1.0, 1.0, 1.0, 1.0)
}

#[test]
fn phi_functions_are_continuous_across_series_switch() {
    for z in [c(0.5 - 1e-12, 0.0), c(0.0, 0.5 - 1e-12), c(-0.3, 0.4 - 1e-12)] {
        let outside = z * (1.0 + 2e-12);
        assert!((phi1(z) - phi1(outside)).norm() < 1e-10);
        assert!((phi2(z) - phi2(outside)).norm() < 1e-10);
    }
    assert!((phi1(c(0.0, 0.0)) - 1.0).norm() < 1e-16);
    assert!((phi2(c(0.0, 0.0)) - 0.5).norm() < 1e-16);
    let z = c(-3.0, 40.0);
    assert!((phi1(z) * z - (z.exp() - 1.0)).norm() < 1e-12);
}

#[test]
fn config_validation() {
    assert!(IntegratorConfig::new(0.0, 0.1).validate().is_err());
    assert!(IntegratorConfig::new(0.01, 0.0).validate().is_err());
    assert!(IntegratorConfig::new(0.01, 1.5).validate().is_err());
    assert!(IntegratorConfig::new(2.0, 0.5).validate().is_err());
    assert!(IntegratorConfig::new(0.01, 0.5).with_record_every(0).validate().is_err());
    assert!(IntegratorConfig::new(0.01, 1.0).validate().is_ok());
    let cfg: IntegratorConfig = serde_json::from_str(r#"{"dt_slow": 0.001, "epsilon": 0.1, "scheme": "etd_rk2"}"#).unwrap();
    assert_eq!(cfg.t_slow, 1.0);
    assert_eq!(cfg.scheme, Scheme::EtdRk2);
    assert_eq!(cfg.steps(), (1000, 0.001));
    assert_eq!(cfg.record_stride(), 16);
    assert!(serde_json::from_str::<IntegratorConfig>(r#"{"dt_slow": 0.1, "dt": 1}"#).is_err());
}

#[test]
fn zero_spec_conserves_actions() {
    let b = cos_basis();
    let v0 = random_v0(1, 8, 1.0);
    for scheme in [Scheme::StrangExactPhase, Scheme::EtdRk2] {
        let cfg = IntegratorConfig::new(1.0 / 512.0, 0.01).with_scheme(scheme);
        let traj = integrate_perturbed(&v0, &NonlinearitySpec::zero(), &b, &cfg).unwrap();
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(traj.states[0], v0);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        for i in &traj.actions {
            assert!(i.sup_distance(&traj.actions[0]) <= 1e-12);
        }
    }
}

#[test]
fn zero_spec_is_exact_phase_flow() {
    let b = cos_basis();
    let eps = 0.05;
    let cfg = IntegratorConfig::new(1.0 / 256.0, eps);
    let traj = integrate_perturbed(&ModeVector::unit(8, 1), &NonlinearitySpec::zero(), &b, &cfg).unwrap();
    let lambda = b.eigenvalues()[0];
    for (tau, v) in traj.times.iter().zip(&traj.states) {
        assert!((v[0] - Complex64::from_polar(1.0, -lambda * tau / eps)).norm() <= 1e-10);
        assert!(v[1..].iter().all(|z| z.norm() == 0.0));
    }
}

#[test]
fn exact_phase_substep_is_unitary() {
    let b = cos_basis();
    let v0 = random_v0(2, 8, 1.0);
    let cfg = IntegratorConfig::new(1.0 / 64.0, 0.001).with_record_every(1);
    let traj = integrate_perturbed(&v0, &NonlinearitySpec::zero(), &b, &cfg).unwrap();
    for w in traj.states.windows(2) {
        for (a, z) in w[0].iter().zip(w[1].iter()) {
            assert!((a.norm() - z.norm()).abs() <= 1e-14);
        }
    }
}

fn action_gap(a: &TrajectoryRecord, b: &TrajectoryRecord) -> f64 {
    // compare at the common final time
    a.actions.last().unwrap().sup_distance(b.actions.last().unwrap())
}

#[test]
fn perturbed_schemes_are_second_order() {
    let b = cos_basis();
    let v0 = random_v0(3, 8, 0.8);
    for scheme in [Scheme::StrangExactPhase, Scheme::EtdRk2] {
        let run = |dt: f64| integrate_perturbed(&v0, &cubic(), &b, &IntegratorConfig::new(dt, 0.1).with_scheme(scheme)).unwrap();
        let (r1, r2, r3) = (run(1.0 / 512.0), run(1.0 / 1024.0), run(1.0 / 2048.0));
        let order = (action_gap(&r1, &r2) / action_gap(&r2, &r3)).log2();
        assert!(order >= 1.8, "{scheme:?}: observed order {order}");
    }
}

#[test]
fn both_perturbed_schemes_agree() {
    let b = cos_basis();
    let v0 = random_v0(4, 8, 0.8);
    let cfg = IntegratorConfig::new(1.0 / 2048.0, 0.1);
    let s = integrate_perturbed(&v0, &cubic(), &b, &cfg).unwrap();
    let e = integrate_perturbed(&v0, &cubic(), &b, &cfg.clone().with_scheme(Scheme::EtdRk2)).unwrap();
    assert!(action_gap(&s, &e) < 1e-5);
}

#[test]
fn effective_linear_diagonal_is_exact() {
    let b = basis(PotentialSpec::constant(1.0), 16, 5);
    let spec = NonlinearitySpec::cgl(0.0, 0.0, 1.0, 1.0);
    let v0 = ModeVector::unit(5, 2).scaled(c(0.6, -0.3));
    let cfg = IntegratorConfig::new(1.0 / 64.0, 1.0);
    let traj = integrate_effective(&v0, &spec, &b, &cfg, AveragingBudget::default()).unwrap();
    let i0 = actions(&v0)[1];
    for ((tau, v), i) in traj.times.iter().zip(&traj.states).zip(averaged_actions(&traj)) {
        assert!((v[1] - v0[1] * (-tau).exp()).norm() <= 1e-8);
        assert!((i[1] - i0 * (-2.0 * tau).exp()).abs() <= 1e-8);
    }
}

#[test]
fn zero_initial_datum_stays_zero() {
    let b = cos_basis();
    let traj = integrate_effective(&ModeVector::zeros(8), &cubic(), &b, &IntegratorConfig::new(0.01, 1.0), AveragingBudget::default()).unwrap();
    assert!(averaged_actions(&traj).iter().all(|i| i.iter().all(|&x| x == 0.0)));
}

#[test]
fn effective_flow_is_rotation_equivariant() {
    let b = basis(PotentialSpec::trig_1d(1.0, &[(1, 0.5, 0.0), (2, 0.0, 0.3)]), 32, 3);
    let v0 = random_v0(5, 3, 1.0);
    let theta = [0.4, 2.5, 5.1];
    let cfg = IntegratorConfig::new(1.0 / 128.0, 1.0);
    for budget in [AveragingBudget::closed_form(), AveragingBudget::quadrature(8)] {
        let a = integrate_effective(&v0, &cubic(), &b, &cfg, budget).unwrap();
        let z = integrate_effective(&rotate(&v0, &theta).unwrap(), &cubic(), &b, &cfg, budget).unwrap();
        for (x, y) in a.states.iter().zip(&z.states) {
            assert!(rotate(x, &theta).unwrap().distance(y) <= 1e-10);
        }
    }
}

#[test]
fn effective_actions_follow_averaged_equation() {
    let b = cos_basis();
    let v0 = random_v0(6, 8, 0.8);
    let residual = |dt: f64| {
        let cfg = IntegratorConfig::new(dt, 1.0).with_horizon(0.25).with_record_every(1);
        let traj = integrate_effective(&v0, &cubic(), &b, &cfg, AveragingBudget::default()).unwrap();
        let mut worst = 0.0_f64;
        for j in 1..traj.len() - 1 {
            let r = effective_field(&traj.states[j], &cubic(), &b, AveragingBudget::default()).unwrap().value;
            for k in 0..8 {
                let rate = (traj.actions[j + 1][k] - traj.actions[j - 1][k]) / (2.0 * dt);
                worst = worst.max((rate - real_pairing(traj.states[j][k], r[k])).abs());
            }
        }
        worst
    };
    let (coarse, fine) = (residual(1.0 / 256.0), residual(1.0 / 512.0));
    assert!((coarse / fine).log2() >= 1.8, "{coarse} -> {fine}");
}

#[test]
fn lifted_action_curves_do_not_depend_on_lift_angle() {
    let b = cos_basis();
    let i0: Vec<f64> = actions(&random_v0(7, 8, 0.8)).to_vec();
    let cfg = IntegratorConfig::new(1.0 / 256.0, 1.0);
    let run = |theta: &[f64]| {
        let v0 = lift(&i0, theta).unwrap();
        averaged_actions(&integrate_effective(&v0, &cubic(), &b, &cfg, AveragingBudget::default()).unwrap())
    };
    let a = run(&[0.0; 8]);
    let z = run(&[0.3, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.7]);
    for (x, y) in a.iter().zip(&z) {
        assert!(x.sup_distance(y) <= 1e-12);
    }
}

#[test]
fn residual_xi_examples() {
    let b = cos_basis();
    let v0 = random_v0(8, 8, 0.8);
    let cfg = IntegratorConfig::new(1.0 / 512.0, 0.1);
    let traj = integrate_perturbed(&v0, &NonlinearitySpec::zero(), &b, &cfg).unwrap();
    let xi = residual_xi(&traj, &NonlinearitySpec::zero(), &b, AveragingBudget::default(), 0).unwrap();
    assert!(xi_sup_norm(&xi) <= 1e-12);

    let traj = integrate_perturbed(&v0, &cubic(), &b, &cfg).unwrap();
    let mut first = traj.clone();
    first.times.truncate(1);
    first.states.truncate(1);
    first.actions.truncate(1);
    let xi = residual_xi(&first, &cubic(), &b, AveragingBudget::default(), 0).unwrap();
    assert_eq!(xi, vec![vec![0.0; 8]]);

    let sup = |eps: f64| {
        let traj = integrate_perturbed(&v0, &cubic(), &b, &IntegratorConfig::new(1.0 / 2048.0, eps)).unwrap();
        xi_sup_norm(&residual_xi(&traj, &cubic(), &b, AveragingBudget::default(), 0).unwrap())
    };
    let (large, small) = (sup(0.5), sup(0.05));
    assert!(small < large, "{large} vs {small}");
}

#[test]
fn dissipation_rhs_for_constants() {
    let b = basis(PotentialSpec::constant(1.0), 16, 3);
    let amp = 0.2;
    // u = amp means v_1 = amp * sqrt(2π)
    let v = ModeVector::unit(3, 1).scaled(c(amp * (2.0 * std::f64::consts::PI).sqrt(), 0.0));
    let gamma = 1.5;
    let spec = NonlinearitySpec::cgl(gamma, 0.0, 1.0, 1.0);
    let want = -2.0 * gamma * amp.powi(4) * 2.0 * std::f64::consts::PI;
    assert!((dissipation_rhs(&v, &spec, &b) - want).abs() < 1e-14);
}

#[test]
fn dissipation_identity_and_bound() {
    let b = cos_basis();
    let mut v0 = random_v0(9, 8, 1.0).into_inner();
    let n = hp_norm(&v0, &b, 0.0);
    v0.iter_mut().for_each(|z| *z /= n);
    let v0 = ModeVector::new(v0);
    let residual = |dt: f64| {
        let cfg = IntegratorConfig::new(dt, 0.1).with_horizon(0.25).with_record_every(1);
        let traj = integrate_perturbed(&v0, &cubic(), &b, &cfg).unwrap();
        let report = dissipation_check(&traj, &cubic(), &b).unwrap();
        assert_eq!(report.b2, 1.0);
        assert!(report.bound_always_holds());
        report.max_residual()
    };
    let (coarse, fine) = (residual(1.0 / 2048.0), residual(1.0 / 4096.0));
    assert!((coarse / fine).log2() >= 1.8, "{coarse} -> {fine}");
    let hamiltonian = NonlinearitySpec::cubic_hamiltonian(1.0);
    let traj = integrate_perturbed(&v0, &hamiltonian, &b, &IntegratorConfig::new(0.01, 0.5)).unwrap();
    assert!(dissipation_check(&traj, &hamiltonian, &b).is_err());
    let quiet = NonlinearitySpec::cgl(1.0, 1.0, 0.0, 1.0);
    let traj = integrate_perturbed(&v0, &quiet, &b, &IntegratorConfig::new(0.01, 0.5)).unwrap();
    assert!(dissipation_check(&traj, &quiet, &b).unwrap().b2.is_infinite());
}

#[test]
fn integration_is_deterministic() {
    let b = cos_basis();
    let v0 = random_v0(10, 8, 0.8);
    let cfg = IntegratorConfig::new(1.0 / 256.0, 0.1);
    let a = integrate_perturbed(&v0, &cubic(), &b, &cfg).unwrap();
    let z = integrate_perturbed(&v0, &cubic(), &b, &cfg).unwrap();
    assert_eq!(a, z);
    assert_eq!(trajectory_csv(&a), trajectory_csv(&z));
}

#[test]
fn blow_up_handling() {
    let b = cos_basis();
    let v0 = random_v0(11, 8, 1.0);
    let n2 = hp_norm(&v0, &b, 2.0);
    let cfg = IntegratorConfig::new(0.01, 0.1).with_blowup_threshold(0.5 * n2);
    assert!(matches!(integrate_perturbed(&v0, &cubic(), &b, &cfg), Err(Error::Diverged { tau, .. }) if tau == 0.0));

    let spec = NonlinearitySpec::cubic_hamiltonian(30.0);
    let cfg = IntegratorConfig::new(1.0 / 1024.0, 1.0).with_blowup_threshold(1.0001 * n2);
    let traj = integrate_perturbed(&v0, &spec, &b, &cfg).unwrap();
    let TrajectoryStatus::Diverged { tau } = traj.status else { panic!("expected divergence") };
    assert_eq!(*traj.times.last().unwrap(), tau);
    assert!(tau < 1.0);
    assert!(traj.norms.last().unwrap()[2] >= 1.0001 * n2);

    let huge = ModeVector::new(vec![c(1e100, 0.0); 8]);
    let cfg = IntegratorConfig::new(0.01, 1.0).with_blowup_threshold(f64::INFINITY);
    assert!(matches!(integrate_perturbed(&huge, &cubic(), &b, &cfg), Err(Error::Numerical(_))));
}

#[test]
fn csv_and_sidecar() {
    let b = cos_basis();
    let v0 = random_v0(12, 8, 0.8);
    let traj = integrate_perturbed(&v0, &cubic(), &b, &IntegratorConfig::new(1.0 / 64.0, 0.2).with_record_every(16)).unwrap();
    assert_eq!(traj.len(), 5);
    let csv = trajectory_csv(&traj);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], TRAJECTORY_CSV_HEADER);
    assert_eq!(lines.len(), 1 + 5 * 8);
    let row: Vec<&str> = lines[9].split(',').collect();
    assert_eq!(row[1], "1");
    assert_eq!(row[2].parse::<f64>().unwrap(), traj.states[1][0].re);
    assert_eq!(row[4].parse::<f64>().unwrap(), traj.actions[1][0]);
    let dir = tempfile::tempdir().unwrap();
    write_trajectory(&traj, dir.path(), "run", serde_json::json!({"epsilon": 0.2})).unwrap();
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(side["kind"], "perturbed");
    assert_eq!(side["status"]["status"], "completed");
    assert_eq!(side["norms"].as_array().unwrap().len(), 5);
    assert!(side["diagnostics"]["mass"].is_array());
    assert_eq!(side["run"]["epsilon"], 0.2);
}

#[test]
fn attach_checks_length() {
    let b = cos_basis();
    let mut traj = integrate_perturbed(&random_v0(13, 8, 0.5), &cubic(), &b, &IntegratorConfig::new(0.125, 0.5).with_record_every(1)).unwrap();
    assert!(traj.attach("xi", vec![0.0; 3]).is_err());
    traj.attach("xi", vec![0.0; traj.len()]).unwrap();
    assert!(traj.diagnostics.contains_key("xi"));
}
