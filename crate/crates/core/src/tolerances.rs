// SPDX-License-Identifier: Apache-2.0

//! Numerical tolerances shared by every module.
//!
//! Structural checks (trace, partial trace, trace preservation of Kraus sets)
//! use [`STRUCTURAL`]; Hermiticity checks use [`HERMITIAN`].

/// Entrywise tolerance on `A - A*` for a matrix to count as Hermitian.
pub const HERMITIAN: f64 = 1e-12;

/// Trace of density matrices.
pub const TRACE: f64 = 1e-12;

/// Partial-trace, Kraus completeness and POVM completeness checks.
pub const STRUCTURAL: f64 = 1e-10;

/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD: f64 = -1e-10;

/// Eigenvalues above this count towards the numerical rank.
pub const RANK: f64 = 1e-9;

/// Born probabilities above `-PROBABILITY_CLAMP` are clamped to zero.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

/// Renormalisation factors further than this from one are logged.
pub const RENORMALISATION_LOG: f64 = 1e-9;

/// Lagrange coefficients below `-HIP_COEFFICIENT` reject a half-space.
pub const HIP_COEFFICIENT: f64 = 1e-12;

/// Relative pivot size below which a half-space normal counts as dependent.
pub const GRAM_PIVOT: f64 = 1e-12;

/// Most negative eigenvalue the depolarizing finalization accepts.
pub const FINALIZE_LIMIT: f64 = -0.1;

/// Bundle of the tolerances above, for callers that want to pass them around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub structural: f64,
    pub psd: f64,
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN,
            trace: TRACE,
            structural: STRUCTURAL,
            psd: PSD,
            rank: RANK,
        }
    }
}
