//! Experiment orchestration: configs, resonance scans, Weyl averages,
//! convergence studies and the built-in self-test.

mod config;
mod resonance;
mod selftest;
mod study;
mod weyl;

pub use config::{InitialCondition, OutputConfig, SimulationConfig, SEED_ENV_VAR};
pub use resonance::{resonance_scan, resonance_scan_values, ResonanceReport, Verdict, ENUMERATION_BUDGET};
pub use selftest::{run_selftest, CheckOutcome, ReferenceAnchors, Tolerances, DEFAULT_TOLERANCES};
pub use study::{
    convergence_study, run_effective, run_perturbed, study_csv, write_study, StudyReport, StudyRow, STUDY_CSV_HEADER,
    STUDY_FORMAT_VERSION,
};
pub use weyl::{weyl_average_test, TrigPolynomial, WeylConfig, WeylRow, MAX_WEYL_DIM};
