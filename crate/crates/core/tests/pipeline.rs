// SPDX-License-Identifier: Apache-2.0

use plsqpt::bounds::{
    direct_projection_bound, f_factor, g_factor, ls_failure_prob, pls_failure_prob, sample_complexity,
    two_step_is_tighter, BoundNorm, ErrorBudget,
};
use plsqpt::channel::{choi_of, distance, ChannelKind, ChannelSpec, Metric, UnitarySpec};
use plsqpt::designs::Scenario;
use plsqpt::estimators::ls_estimate;
use plsqpt::projections::{pls_pipeline, Method, PipelineConfig};
use plsqpt::simulator::{sample, SamplingPlan, Scheme};

#[test]
fn pls_output_is_physical_and_beats_ls() {
    for scenario in Scenario::ALL {
        let spec = ChannelSpec::new(ChannelKind::Unitary { unitary: UnitarySpec::Haar { seed: 4 } }, 2);
        let truth = choi_of(&spec).unwrap();
        let table = sample(&truth, scenario, &SamplingPlan::new(Scheme::Random, 200_000, 8)).unwrap();
        let ls = ls_estimate(&table).unwrap();
        for method in Method::ALL {
            let out = pls_pipeline(&ls, &PipelineConfig { method, ..Default::default() }).unwrap();
            assert!(out.estimate.is_physical(), "{scenario} {method}");
            let pls = distance(out.estimate.matrix(), truth.matrix(), Metric::Trace).unwrap();
            let raw = distance(&ls.matrix, truth.matrix(), Metric::Trace).unwrap();
            assert!(pls <= raw, "{scenario} {method}: {pls} > {raw}");
            assert!(pls <= 2.0);
        }
    }
}

#[test]
fn direct_mode_skips_thresholding() {
    let truth = choi_of(&ChannelSpec::new(ChannelKind::Depolarizing { p: 0.2 }, 2)).unwrap();
    let table = sample(&truth, Scenario::PauliChoi, &SamplingPlan::new(Scheme::Random, 5_000, 1)).unwrap();
    let ls = ls_estimate(&table).unwrap();
    let out = pls_pipeline(&ls, &PipelineConfig { direct: true, ..Default::default() }).unwrap();
    assert_eq!(out.tau, 0.0);
    assert!(out.estimate.is_physical());
}

#[test]
fn bound_factors() {
    assert_eq!(g_factor(Scenario::PauliChoi, 1), 1.0 / 9.0);
    assert_eq!(g_factor(Scenario::MubChoi, 1), 1.0 / 8.0);
    assert_eq!(f_factor(Scenario::MubIo, 1), 1.0 / 64.0);
}

#[test]
fn bound_evaluations() {
    // 4·exp(−3Nε²g/(64r)) with N=1e5, ε=0.1, g=1/8, r=1.
    let b = ErrorBudget::new(Scenario::MubChoi, 1, 100_000);
    let expect = 4.0 * (-375.0f64 / 64.0).exp();
    assert!((pls_failure_prob(&b, BoundNorm::Frobenius).unwrap() - expect).abs() < 1e-15);

    let n = sample_complexity(&ErrorBudget::new(Scenario::MubChoi, 1, 1).with_eta(0.01)).unwrap();
    let exact = 256.0 * (8.0 / (3.0 * 0.01)) * 400f64.ln();
    assert_eq!(n, exact.ceil() as u64);
    assert!(n.abs_diff(409_018) <= 1);

    let ls = ls_failure_prob(&ErrorBudget::new(Scenario::PauliChoi, 1, 10_000), BoundNorm::Operator).unwrap();
    assert!((ls - 4.0 * (-(3.0e4 * 0.01 / 8.0) / 9.0f64).exp()).abs() < 1e-12);
    assert!((ls - 0.0621).abs() < 5e-4);

    let direct = ErrorBudget::new(Scenario::PauliChoi, 1, 10_000);
    assert!(!two_step_is_tighter(&direct).unwrap());
    assert!(direct_projection_bound(&direct).unwrap().sample_complexity > 0);
}
