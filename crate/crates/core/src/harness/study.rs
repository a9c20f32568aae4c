use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::SimulationConfig;
use crate::action_angle::action_norm;
use crate::dynamics::{
    fmt_f64, integrate_effective, integrate_perturbed, residual_xi, write_trajectory, xi_sup_norm, TrajectoryKind,
    TrajectoryRecord, TrajectoryStatus,
};
use crate::error::{Error, Result};
use crate::spectral::SpectralBasis;

pub const STUDY_CSV_HEADER: &str = "epsilon,sup_err_q0,sup_err_q1,sup_xi,wallclock_s";
pub const STUDY_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub epsilon: f64,
    /// `max_τ |I(v^ε) - I⁰|~_q` for `q = 0`, `1` and the configured `q`; absent in xi-only mode.
    pub sup_err_q0: Option<f64>,
    pub sup_err_q1: Option<f64>,
    pub sup_err_q: Option<f64>,
    pub sup_xi: f64,
    /// `max_τ |v^ε(τ)|_2`.
    pub sup_norm2: f64,
    pub wallclock_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub comparison_q: f64,
    pub xi_only: bool,
    pub rows: Vec<StudyRow>,
    /// `sup |v|_2` over all perturbed runs.
    pub a_priori_bound: f64,
    /// Set when the sweep has at least two entries.
    pub err_strictly_decreasing: Option<bool>,
    pub err_ratio_last_first: Option<f64>,
    pub xi_decreasing: Option<bool>,
}

fn diverged(label: &str, traj: &TrajectoryRecord) -> Result<()> {
    if let TrajectoryStatus::Diverged { tau } = traj.status {
        return Err(Error::Diverged { tau, detail: format!("{label} run crossed the blow-up threshold") });
    }
    Ok(())
}

/// One perturbed run at `epsilon` from the configured initial datum.
pub fn run_perturbed(cfg: &SimulationConfig, basis: &SpectralBasis, epsilon: f64) -> Result<TrajectoryRecord> {
    let v0 = cfg.initial_condition.mode_vector(basis)?;
    integrate_perturbed(&v0, &cfg.nonlinearity, basis, &cfg.integrator_for(epsilon))
}

/// One effective run from the configured initial datum.
pub fn run_effective(cfg: &SimulationConfig, basis: &SpectralBasis) -> Result<TrajectoryRecord> {
    let v0 = cfg.initial_condition.mode_vector(basis)?;
    integrate_effective(&v0, &cfg.nonlinearity, basis, &cfg.integrator_for(1.0), cfg.averaging)
}

fn sup_action_error(a: &TrajectoryRecord, b: &TrajectoryRecord, basis: &SpectralBasis, q: f64) -> f64 {
    a.actions
        .iter()
        .zip(&b.actions)
        .map(|(x, y)| {
            let diff: Vec<f64> = x.iter().zip(y.iter()).map(|(p, r)| p - r).collect();
            action_norm(&diff, basis, q)
        })
        .fold(0.0, f64::max)
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Effective run once, then the perturbed sweep in parallel. With `xi_only`
/// the effective run is skipped and only `Ξ` is reported.
pub fn convergence_study(cfg: &SimulationConfig, xi_only: bool) -> Result<(StudyReport, Vec<TrajectoryRecord>)> {
    cfg.validate()?;
    let basis = cfg.basis()?;
    let effective = if xi_only {
        None
    } else {
        let traj = run_effective(cfg, &basis)?;
        diverged("effective", &traj)?;
        Some(traj)
    };
    let results: Vec<(StudyRow, TrajectoryRecord)> = cfg
        .epsilon_sweep
        .par_iter()
        .map(|&eps| {
            let start = Instant::now();
            let traj = run_perturbed(cfg, &basis, eps)?;
            diverged(&format!("epsilon = {eps}"), &traj).map_err(|e| match e {
                Error::Diverged { tau, detail } => Error::Diverged { tau, detail: format!("{detail} (epsilon = {eps})") },
                other => other,
            })?;
            let xi = residual_xi(&traj, &cfg.nonlinearity, &basis, cfg.averaging, cfg.averaging.seed)?;
            let errors = match &effective {
                Some(eff) => {
                    if eff.times != traj.times {
                        return Err(Error::Numerical("perturbed and effective records are not aligned".into()));
                    }
                    (
                        Some(sup_action_error(&traj, eff, &basis, 0.0)),
                        Some(sup_action_error(&traj, eff, &basis, 1.0)),
                        Some(sup_action_error(&traj, eff, &basis, cfg.comparison_q)),
                    )
                }
                None => (None, None, None),
            };
            let wallclock_s = if cfg.output.record_wallclock { start.elapsed().as_secs_f64() } else { 0.0 };
            let row = StudyRow {
                epsilon: eps,
                sup_err_q0: errors.0,
                sup_err_q1: errors.1,
                sup_err_q: errors.2,
                sup_xi: xi_sup_norm(&xi),
                sup_norm2: traj.norms.iter().map(|n| n[2]).fold(0.0, f64::max),
                wallclock_s,
            };
            Ok((row, traj))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, mut trajectories): (Vec<StudyRow>, Vec<TrajectoryRecord>) = results.into_iter().unzip();
    let many = rows.len() > 1;
    let errs: Vec<f64> = rows.iter().filter_map(|r| r.sup_err_q).collect();
    let xis: Vec<f64> = rows.iter().map(|r| r.sup_xi).collect();
    let report = StudyReport {
        comparison_q: cfg.comparison_q,
        xi_only,
        a_priori_bound: rows.iter().map(|r| r.sup_norm2).fold(0.0, f64::max),
        err_strictly_decreasing: (many && !xi_only).then(|| strictly_decreasing(&errs)),
        err_ratio_last_first: (many && !xi_only).then(|| errs[errs.len() - 1] / errs[0]),
        xi_decreasing: many.then(|| strictly_decreasing(&xis)),
        rows,
    };
    if let Some(eff) = effective {
        trajectories.push(eff);
    }
    Ok((report, trajectories))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn study_csv(report: &StudyReport) -> String {
    let mut out = String::from(STUDY_CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.epsilon),
            opt(r.sup_err_q0),
            opt(r.sup_err_q1),
            fmt_f64(r.sup_xi),
            fmt_f64(r.wallclock_s)
        );
    }
    out
}

/// Writes `study.csv`, `summary.json` and, if configured, per-run trajectories.
pub fn write_study(report: &StudyReport, trajectories: &[TrajectoryRecord], cfg: &SimulationConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("study.csv"), study_csv(report))?;
    let summary = json!({
        "format_version": STUDY_FORMAT_VERSION,
        "config": cfg,
        "report": report,
    });
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    if cfg.output.write_trajectories {
        for traj in trajectories {
            let stem = match traj.kind {
                TrajectoryKind::Effective => "effective".to_string(),
                TrajectoryKind::Perturbed => format!("perturbed_eps_{}", traj.config.epsilon),
            };
            write_trajectory(traj, dir, &stem, json!({ "epsilon": traj.config.epsilon }))?;
        }
    }
    Ok(())
}
