//! Averaging for weakly nonlinear Schrödinger and complex Ginzburg-Landau
//! equations on the torus `T^d`, `d ∈ {1, 2}`.
//!
//! The crate diagonalises `A_V = -Δ + V(x)`, writes the perturbed flow in
//! action-angle coordinates of the linear problem, builds the angle-averaged
//! effective equation and compares both dynamics in slow time.

pub mod action_angle;
pub mod averaging;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod harness;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
