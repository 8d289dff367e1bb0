// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration, seeded runs, reference oracles and acceptance suites.

pub mod config;
pub mod oracles;
pub mod run;
pub mod verify;

pub use config::{ExperimentConfig, ExperimentKind, SweepPoint};
pub use run::{run, write_outputs, RunOutput, RunRecord};
pub use verify::{run_suite, Check, Suite, SuiteReport};
