//! Command-line front end. Exit codes: 0 success, 1 usage or configuration
//! error, 2 numerical failure (blow-up, NaN), 3 self-test failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::dynamics::{write_trajectory, TrajectoryRecord, TrajectoryStatus};
use crate::error::{Error, Result};
use crate::harness::{
    convergence_study, resonance_scan, run_effective, run_perturbed, run_selftest, write_study, SimulationConfig, Tolerances,
    WeylConfig,
};
use crate::spectral::{basis_to_json, weyl_fit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nlsavg", version, about = "Averaging for weakly nonlinear Schrodinger and Ginzburg-Landau equations")]
struct Cli {
    /// Cap on worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON simulation config.
    #[arg(long)]
    config: PathBuf,
    /// Averaging seed; falls back to NLSAVG_SEED, then the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assemble A_V, export the basis and fit the Weyl exponent.
    Spectrum(ConfigArgs),
    /// Search for small integer relations among the leading eigenvalues.
    Resonance {
        #[command(flatten)]
        common: ConfigArgs,
        /// Number of leading modes K (defaults to min(M, 6)).
        #[arg(long)]
        modes: Option<usize>,
        /// Coefficient bound S.
        #[arg(long, default_value_t = 3)]
        bound: i64,
        #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
        tol: f64,
    },
    /// Time averages along a linear flow on the torus versus the Haar average.
    Weyl {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One perturbed run.
    Simulate {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// One effective run.
    Effective {
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Full epsilon sweep against the effective dynamics.
    Converge {
        #[command(flatten)]
        common: ConfigArgs,
        /// Replace the sweep by a single epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Only compute the residual Xi, skipping the effective run.
        #[arg(long)]
        xi_only: bool,
    },
    /// Run the invariant suite against the tolerance file.
    Selftest {
        /// Tolerance file; the shipped one is used otherwise.
        #[arg(long)]
        tolerances: Option<PathBuf>,
    },
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Error::Config(format!("cannot build thread pool: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn load(common: &ConfigArgs) -> Result<(SimulationConfig, PathBuf)> {
    let mut cfg = SimulationConfig::from_path(&common.config)?;
    cfg.apply_seed(common.seed)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, out))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Spectrum(common) => spectrum(&common),
        Command::Resonance { common, modes, bound, tol } => {
            let (cfg, _) = load(&common)?;
            let basis = cfg.basis()?;
            let k = modes.unwrap_or(basis.truncation().min(6));
            print_json(&serde_json::to_value(resonance_scan(&basis, k, bound, tol)?)?)?;
            Ok(EXIT_OK)
        }
        Command::Weyl { config, out } => weyl(&config, out.as_deref()),
        Command::Simulate { common, epsilon } => {
            let (mut cfg, out) = load(&common)?;
            if let Some(eps) = epsilon {
                cfg.integrator.epsilon = eps;
            }
            cfg.validate()?;
            let basis = cfg.basis()?;
            let traj = run_perturbed(&cfg, &basis, cfg.integrator.epsilon)?;
            finish_run(&traj, &cfg, &out, "perturbed")
        }
        Command::Effective { common } => {
            let (cfg, out) = load(&common)?;
            let basis = cfg.basis()?;
            let traj = run_effective(&cfg, &basis)?;
            finish_run(&traj, &cfg, &out, "effective")
        }
        Command::Converge { common, epsilon, xi_only } => {
            let (mut cfg, out) = load(&common)?;
            if let Some(eps) = epsilon {
                cfg.epsilon_sweep = vec![eps];
            }
            cfg.output.dir = out.clone();
            let (report, trajectories) = convergence_study(&cfg, xi_only)?;
            write_study(&report, &trajectories, &cfg, &out)?;
            print_json(&serde_json::to_value(&report)?)?;
            Ok(EXIT_OK)
        }
        Command::Selftest { tolerances } => {
            let tol = match tolerances {
                Some(path) => Tolerances::from_json(
                    &fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
                )?,
                None => Tolerances::builtin(),
            };
            let outcomes = run_selftest(&tol);
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            Ok(if outcomes.iter().all(|o| o.passed) { EXIT_OK } else { EXIT_SELFTEST })
        }
    }
}

fn spectrum(common: &ConfigArgs) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let basis = cfg.basis()?;
    fs::create_dir_all(&out)?;
    fs::write(out.join("basis.json"), basis_to_json(&basis)?)?;
    let mut csv = String::from("k,lambda\n");
    for (k, l) in basis.eigenvalues().iter().enumerate() {
        let _ = writeln!(csv, "{},{l:.16e}", k + 1);
    }
    fs::write(out.join("spectrum.csv"), csv)?;
    let fit = weyl_fit(&basis).ok();
    print_json(&json!({
        "truncation": basis.truncation(),
        "eigenvalues": basis.eigenvalues(),
        "orthonormality_residual": basis.orthonormality_residual(),
        "potential_meets_unit_floor": basis.potential().meets_unit_floor(),
        "weyl_fit": fit,
    }))?;
    Ok(EXIT_OK)
}

fn weyl(config: &Path, out: Option<&Path>) -> Result<i32> {
    let text = fs::read_to_string(config).map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
    let cfg: WeylConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("weyl config schema: {e}")))?;
    let rows = cfg.run()?;
    let mut csv = String::from("horizon,time_average,haar_average,gap\n");
    for r in &rows {
        let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e}", r.horizon, r.time_average, r.haar_average, r.gap);
    }
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("weyl.csv"), csv)?;
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

fn finish_run(traj: &TrajectoryRecord, cfg: &SimulationConfig, out: &Path, stem: &str) -> Result<i32> {
    write_trajectory(traj, out, stem, json!({ "config": cfg }))?;
    let summary = json!({
        "status": traj.status,
        "records": traj.len(),
        "final_actions": traj.actions.last(),
        "sup_norm2": traj.norms.iter().map(|n| n[2]).fold(0.0, f64::max),
    });
    print_json(&summary)?;
    if let TrajectoryStatus::Diverged { tau } = traj.status {
        return Err(Error::Diverged { tau, detail: format!("{stem} run crossed the blow-up threshold") });
    }
    Ok(EXIT_OK)
}
