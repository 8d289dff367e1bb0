// SPDX-License-Identifier: Apache-2.0

//! Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

use plsqpt::harness::verify::{limits, run_suite, Suite};

fn gate(suite: Suite) {
    let report = run_suite(suite).expect("suite ran");
    println!("{}", report.summary_line());
    for c in report.checks.iter().filter(|c| !c.pass) {
        println!("    failed {}: {:e} {} {:e}", c.name, c.measured, c.relation.symbol(), c.threshold);
    }
    assert!(report.passed, "{}", report.summary_line());
}

#[test]
fn tolerances_are_pinned() {
    assert_eq!(limits::IDENTIFIABILITY, 1e-9);
    assert_eq!(limits::ISOTROPY, 1e-10);
    assert_eq!(limits::ORACLE, 1e-6);
    assert_eq!(limits::PROPERTY_SLACK, 1e-12);
    assert_eq!(limits::DUAL_SLACK, 1e-9);
    assert_eq!((limits::SLOPE_LOW, limits::SLOPE_HIGH), (-0.6, -0.4));
    assert_eq!(limits::LOW_RANK_FACTOR, 10.0);
    assert_eq!(limits::RANK_STEP_RATIO, 2.2);
    assert_eq!(limits::LAMBDA_TARGET, -1e-7);
    assert_eq!(limits::ITERATION_CAP, 500);
    assert_eq!(limits::AGREEMENT, 1e-4);
    assert_eq!(limits::DUAL_GRADIENT, 1e-8);
    assert_eq!(limits::BINOMIAL_SIGMAS, 3.0);
    assert_eq!(limits::COVERAGE_ETA, 0.05);
}

#[test]
fn criterion_01_identifiability() {
    gate(Suite::Identifiability);
}

#[test]
fn criterion_02_isotropy() {
    gate(Suite::Isotropy);
}

#[test]
fn criterion_03_oracles() {
    gate(Suite::Oracles);
}

#[test]
fn criterion_04_properties() {
    gate(Suite::Properties);
}

#[test]
fn criterion_05_scaling() {
    gate(Suite::Scaling);
}

#[test]
fn criterion_06_low_rank() {
    gate(Suite::LowRank);
}

#[test]
fn criterion_07_rank_monotonicity() {
    gate(Suite::RankMonotonicity);
}

#[test]
fn criterion_08_hip_speed() {
    gate(Suite::HipSpeed);
}

#[test]
fn criterion_09_agreement() {
    gate(Suite::Agreement);
}

#[test]
fn criterion_10_bound_validity() {
    gate(Suite::BoundValidity);
}

#[test]
fn criterion_11_determinism() {
    gate(Suite::Determinism);
}
