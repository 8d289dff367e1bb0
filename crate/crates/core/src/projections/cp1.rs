// SPDX-License-Identifier: Apache-2.0

//! Thresholded projection onto trace-one PSD matrices.

use crate::error::{QptError, Result};
use crate::linalg::{self, CMatrix};
use crate::tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct Cp1Result {
    /// PSD, trace one.
    pub matrix: CMatrix,
    /// New eigenvalues, in the eigenbasis order of the input (ascending input eigenvalues).
    pub spectrum: Vec<f64>,
    /// Number of nonzero entries in `spectrum`.
    pub rank: usize,
}

/// Map ascending eigenvalues `λ` to the thresholded trace-one spectrum.
///
/// Eigenvalues at or below `τ` are zeroed and the rest shifted up by `τ`. If the
/// survivors carry at least unit mass they are water-filled down to trace one.
/// Otherwise the top eigenvalues are taken as `λ_i + τ` down to the first index
/// whose inclusion reaches unit mass, and that index gets the remaining mass.
pub fn threshold_spectrum(lambda: &[f64], tau: f64) -> Vec<f64> {
    let n = lambda.len();
    let mu: Vec<f64> = lambda.iter().map(|&l| if l <= tau { 0.0 } else { l + tau }).collect();
    let total: f64 = mu.iter().sum();
    if total >= 1.0 {
        let x0 = water_level(&mu);
        return mu.iter().map(|&m| (m - x0).max(0.0)).collect();
    }
    let mut out = vec![0.0; n];
    let mut above = 0.0;
    for j in (0..n).rev() {
        let s = above + lambda[j] + tau;
        if s >= 1.0 {
            out[j] = 1.0 - above;
            return out;
        }
        out[j] = lambda[j] + tau;
        above = s;
    }
    // Only reachable through rounding, since the full sum is 1 + nτ.
    out[0] += 1.0 - above;
    out
}

/// `x0` with `Σ (μ_i - x0)₊ = 1`, assuming `Σ μ_i ≥ 1`.
fn water_level(mu: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = mu.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut level = 0.0;
    for (k, &m) in sorted.iter().enumerate() {
        cum += m;
        let candidate = (cum - 1.0) / (k + 1) as f64;
        if m > candidate {
            level = candidate;
        } else {
            break;
        }
    }
    level
}

/// Thresholded projection of a trace-one Hermitian matrix onto trace-one PSD matrices.
pub fn proj_cp1_thresholded(x: &CMatrix, tau: f64) -> Result<Cp1Result> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(QptError::InvalidInput(format!("threshold τ = {tau} must be a finite non-negative number")));
    }
    let scale = linalg::frobenius_norm(x).max(1.0);
    if !x.is_square() || linalg::hermiticity_defect(x) > tolerances::STRUCTURAL * scale {
        return Err(QptError::InvalidInput("thresholded projection needs a Hermitian matrix".into()));
    }
    let tr = linalg::trace(x).re;
    if (tr - 1.0).abs() > tolerances::STRUCTURAL {
        return Err(QptError::ConstraintViolation(format!("thresholded projection needs trace one, got {tr}")));
    }
    let evd = linalg::eigh(x)?;
    let spectrum = threshold_spectrum(&evd.values, tau);
    let rank = spectrum.iter().filter(|&&m| m > 0.0).count();
    let matrix = evd.rebuild(&spectrum);
    debug_assert!((linalg::trace(&matrix).re - 1.0).abs() < 1e-9);
    Ok(Cp1Result { matrix, spectrum, rank })
}

/// Plain Frobenius projection onto trace-one PSD matrices of a trace-one input.
pub fn proj_cp1(x: &CMatrix) -> Result<CMatrix> {
    Ok(proj_cp1_thresholded(x, 0.0)?.matrix)
}
