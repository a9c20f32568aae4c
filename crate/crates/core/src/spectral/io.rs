use serde::{Deserialize, Serialize};

use super::basis::SpectralBasis;
use super::grid::Grid;
use super::potential::{Potential, PotentialSpec};
use crate::error::{Error, Result};

pub const BASIS_FORMAT_VERSION: u32 = 1;

/// On-disk form of a [`SpectralBasis`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisDocument {
    pub format_version: u32,
    pub dim: usize,
    #[serde(rename = "N")]
    pub points_per_axis: usize,
    #[serde(rename = "M")]
    pub truncation: usize,
    pub eigenvalues: Vec<f64>,
    /// One row per eigenfunction, grid values in row-major order.
    pub eigenvectors: Vec<Vec<f64>>,
    pub potential: PotentialSpec,
}

impl BasisDocument {
    pub fn from_basis(basis: &SpectralBasis) -> Self {
        let grid = basis.grid();
        Self {
            format_version: BASIS_FORMAT_VERSION,
            dim: grid.dim(),
            points_per_axis: grid.points_per_axis(),
            truncation: basis.truncation(),
            eigenvalues: basis.eigenvalues().to_vec(),
            eigenvectors: basis.eigenfunctions_flat().chunks_exact(grid.len()).map(<[f64]>::to_vec).collect(),
            potential: basis.potential().description().clone(),
        }
    }

    pub fn into_basis(self) -> Result<SpectralBasis> {
        if self.format_version != BASIS_FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported basis format version {}", self.format_version)));
        }
        let grid = Grid::new(self.dim, self.points_per_axis)?;
        if self.eigenvalues.len() != self.truncation || self.eigenvectors.len() != self.truncation {
            return Err(Error::Shape(format!(
                "basis document declares M = {} but holds {} eigenvalues and {} eigenvectors",
                self.truncation,
                self.eigenvalues.len(),
                self.eigenvectors.len()
            )));
        }
        if self.eigenvectors.iter().any(|row| row.len() != grid.len()) {
            return Err(Error::Shape("eigenvector row length does not match grid".into()));
        }
        let potential = Potential::new(self.potential, grid)?;
        SpectralBasis::from_parts(potential, self.eigenvalues, self.eigenvectors.concat())
    }
}

pub fn basis_to_json(basis: &SpectralBasis) -> Result<String> {
    Ok(serde_json::to_string(&BasisDocument::from_basis(basis))?)
}

pub fn basis_from_json(text: &str) -> Result<SpectralBasis> {
    serde_json::from_str::<BasisDocument>(text)?.into_basis()
}
