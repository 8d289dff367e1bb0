// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the tomography library.
#[derive(Debug, Error)]
pub enum QptError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("invalid rank {rank}: must be between 1 and {max}")]
    InvalidRank { rank: usize, max: usize },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),

    #[error("scenario mismatch: expected scenario {expected}, table holds scenario {found}")]
    ScenarioMismatch { expected: u8, found: u8 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value outside the domain of the bound: {0}")]
    Domain(String),

    #[error("projection has not converged: {0}")]
    NotConverged(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QptError>;
