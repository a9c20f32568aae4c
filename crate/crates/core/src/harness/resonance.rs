use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralBasis;

/// Largest number of integer vectors a scan may enumerate.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Resonant,
    NonResonantAtTolerance,
}

/// Smallest `|Σ s_k λ_k|` over nonzero `s` with `|s_k| ≤ S` on the first `K` modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub best_vector: Vec<i64>,
    pub best_value: f64,
    pub modes: usize,
    pub bound: i64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

pub fn resonance_scan(basis: &SpectralBasis, modes: usize, bound: i64, tol: f64) -> Result<ResonanceReport> {
    if modes > basis.truncation() {
        return Err(Error::Config(format!("K = {modes} exceeds truncation {}", basis.truncation())));
    }
    resonance_scan_values(&basis.eigenvalues()[..modes], bound, tol)
}

/// Scan over explicit frequencies. Only one of `s`, `-s` is visited; ties keep
/// the first vector in lexicographic order of `(s_1, …, s_K)` from `-S`.
pub fn resonance_scan_values(lambda: &[f64], bound: i64, tol: f64) -> Result<ResonanceReport> {
    let k = lambda.len();
    if k == 0 || bound < 1 {
        return Err(Error::Config(format!("resonance scan needs K >= 1 and S >= 1, got K = {k}, S = {bound}")));
    }
    let side = (2 * bound + 1) as u64;
    let total = side.checked_pow(k as u32).filter(|&t| t <= ENUMERATION_BUDGET).ok_or_else(|| {
        Error::Config(format!("(2S+1)^K = {side}^{k} exceeds the enumeration budget {ENUMERATION_BUDGET}"))
    })?;
    let mut s = vec![-bound; k];
    let mut best_value = f64::INFINITY;
    let mut best_vector = Vec::new();
    for _ in 0..total {
        // canonical representative: first nonzero entry positive
        if let Some(first) = s.iter().find(|&&x| x != 0) {
            if *first > 0 {
                let value = s.iter().zip(lambda).map(|(a, l)| *a as f64 * l).sum::<f64>().abs();
                if value < best_value {
                    best_value = value;
                    best_vector = s.clone();
                }
            }
        }
        for digit in s.iter_mut().rev() {
            if *digit < bound {
                *digit += 1;
                break;
            }
            *digit = -bound;
        }
    }
    let verdict = if best_value <= tol { Verdict::Resonant } else { Verdict::NonResonantAtTolerance };
    Ok(ResonanceReport { best_vector, best_value, modes: k, bound, tolerance: tol, verdict })
}
