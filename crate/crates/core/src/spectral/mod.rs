//! Operator `A_V = -Δ + V` on the torus: assembly, eigenbasis, mode map and norms.

mod basis;
mod fourier;
mod grid;
mod io;
mod potential;
mod state;

pub use basis::{assemble_operator, hp_norm, mode_inverse, mode_transform, sobolev_norm, weyl_fit, SpectralBasis, WeylFit};
pub use fourier::FourierTransform;
pub use grid::Grid;
pub use io::{basis_from_json, basis_to_json, BasisDocument, BASIS_FORMAT_VERSION};
pub use potential::{Potential, PotentialSpec, TrigTerm};
pub use state::{FieldState, ModeVector};
