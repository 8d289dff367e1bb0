// SPDX-License-Identifier: Apache-2.0

pub mod bounds;
pub mod channel;
pub mod designs;
pub mod error;
pub mod gf2m;
pub mod harness;
pub mod linalg;
pub mod estimators;
pub mod pauli;
pub mod projections;
pub mod simulator;
pub mod tolerances;

pub use error::{QptError, Result};
