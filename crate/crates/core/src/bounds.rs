// SPDX-License-Identifier: Apache-2.0

//! Concentration bounds, sample complexities and confidence regions.
//!
//! All logarithms are natural. For `k` qubits `d = 2^k`. Accuracy parameters are
//! Frobenius or trace-norm thresholds, not squared ones.

use serde::{Deserialize, Serialize};

use crate::designs::Scenario;
use crate::error::{QptError, Result};

/// Norm in which an error is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundNorm {
    Frobenius,
    Trace,
    Operator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub scenario: Scenario,
    /// Qubits; `d = 2^k`.
    pub k: u32,
    pub shots: u64,
    pub rank: usize,
    /// Almost-rank slack.
    pub delta: f64,
    /// Failure probability.
    pub eta: f64,
    /// Accuracy.
    pub epsilon: f64,
}

impl ErrorBudget {
    pub fn new(scenario: Scenario, k: u32, shots: u64) -> Self {
        Self { scenario, k, shots, rank: 1, delta: 0.0, eta: 0.05, epsilon: 0.1 }
    }

    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = rank;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    /// `d²` as a float.
    fn d2(&self) -> f64 {
        4f64.powi(self.k as i32)
    }

    pub fn g(&self) -> f64 {
        g_factor(self.scenario, self.k)
    }

    pub fn f(&self) -> f64 {
        f_factor(self.scenario, self.k)
    }

    fn check_k(&self) -> Result<()> {
        if self.k == 0 || self.k > 30 {
            return Err(QptError::Domain(format!("qubit count k = {} outside 1..=30", self.k)));
        }
        Ok(())
    }

    fn check_rank(&self) -> Result<()> {
        let max = 1usize << (2 * self.k);
        if self.rank == 0 || self.rank > max {
            return Err(QptError::InvalidRank { rank: self.rank, max });
        }
        Ok(())
    }
}

fn open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(QptError::Domain(format!("{name} = {x} is outside (0, 1)")))
    }
}

fn closed_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(QptError::Domain(format!("{name} = {x} is outside [0, 1]")))
    }
}

/// Design-dependent constant of the two-step bounds.
pub fn g_factor(scenario: Scenario, k: u32) -> f64 {
    let d2 = 4f64.powi(k as i32);
    match scenario {
        Scenario::PauliChoi | Scenario::PauliIo => 1.0 / 9f64.powi(k as i32),
        Scenario::MubChoi => 1.0 / (2.0 * d2),
        Scenario::MubIo => 1.0 / (4.0 * d2),
    }
}

/// Constant of the direct-projection bound, `g / d²`.
pub fn f_factor(scenario: Scenario, k: u32) -> f64 {
    g_factor(scenario, k) / 4f64.powi(k as i32)
}

/// Exponent of the projected-estimator bound: `3Nε² g / (64 r)` for the Frobenius norm,
/// `3Nε² g / (256 r²)` for the trace norm.
pub fn pls_exponent(b: &ErrorBudget, norm: BoundNorm) -> Result<f64> {
    b.check_k()?;
    b.check_rank()?;
    open_unit("epsilon", b.epsilon)?;
    let r = b.rank as f64;
    let base = 3.0 * b.shots as f64 * b.epsilon * b.epsilon * b.g();
    match norm {
        BoundNorm::Frobenius => Ok(base / (64.0 * r)),
        BoundNorm::Trace => Ok(base / (256.0 * r * r)),
        BoundNorm::Operator => Err(QptError::Domain("no operator-norm bound for the projected estimator".into())),
    }
}

/// Bound on `Pr[‖Φ_PLS - Φ‖ ≥ ε]` for rank-`r` channels, `d² exp(-exponent)`, uncapped.
pub fn pls_failure_prob_raw(b: &ErrorBudget, norm: BoundNorm) -> Result<f64> {
    Ok(b.d2() * (-pls_exponent(b, norm)?).exp())
}

/// [`pls_failure_prob_raw`] capped at 1.
pub fn pls_failure_prob(b: &ErrorBudget, norm: BoundNorm) -> Result<f64> {
    Ok(pls_failure_prob_raw(b, norm)?.min(1.0))
}

/// Shots sufficient for Frobenius accuracy `ε` with probability `1 - η`:
/// `⌈(32 r / g)(8 / (3ε²)) ln(d² / η)⌉`.
pub fn sample_complexity(b: &ErrorBudget) -> Result<u64> {
    b.check_k()?;
    b.check_rank()?;
    open_unit("epsilon", b.epsilon)?;
    open_unit("eta", b.eta)?;
    let n = sample_complexity_real(b.rank as f64, b.g(), b.epsilon, b.eta, b.d2());
    Ok(n.ceil() as u64)
}

fn sample_complexity_real(r: f64, g: f64, eps: f64, eta: f64, d2: f64) -> f64 {
    (32.0 * r / g) * (8.0 / (3.0 * eps * eps)) * (d2 / eta).ln()
}

/// Bound on `Pr[‖Φ_LS - Φ‖ ≥ ε]`.
///
/// Operator norm: `d² exp(-3Nε² g / 8)`. Frobenius: the same with `ε² → ε²/d²`.
pub fn ls_failure_prob(b: &ErrorBudget, norm: BoundNorm) -> Result<f64> {
    b.check_k()?;
    closed_unit("epsilon", b.epsilon)?;
    let base = 3.0 * b.shots as f64 * b.epsilon * b.epsilon * b.g() / 8.0;
    let exponent = match norm {
        BoundNorm::Operator => base,
        BoundNorm::Frobenius => base / b.d2(),
        BoundNorm::Trace => {
            return Err(QptError::Domain("no trace-norm bound for the least-squares estimator".into()))
        }
    };
    Ok(b.d2() * (-exponent).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectBound {
    /// Bound on `Pr[‖Φ - Φ_direct‖_F ≥ ε]`, uncapped.
    pub failure_prob: f64,
    /// Shots sufficient for that probability to be at most `η`.
    pub sample_complexity: u64,
}

/// Bounds for projecting the LS estimate straight onto `𝒞𝒫𝒯𝒫`.
///
/// Evaluated at squared accuracy `ε²`: `d² exp(-3Nε² f / 8)` and `⌈(1/f)(8/(3ε²)) ln(d²/η)⌉`.
pub fn direct_projection_bound(b: &ErrorBudget) -> Result<DirectBound> {
    b.check_k()?;
    open_unit("epsilon", b.epsilon)?;
    open_unit("eta", b.eta)?;
    let e2 = b.epsilon * b.epsilon;
    let failure_prob = b.d2() * (-3.0 * b.shots as f64 * e2 * b.f() / 8.0).exp();
    let n = (1.0 / b.f()) * (8.0 / (3.0 * e2)) * (b.d2() / b.eta).ln();
    Ok(DirectBound { failure_prob, sample_complexity: n.ceil() as u64 })
}

/// Whether the two-step sample complexity is below the direct one; holds iff `r < d²/32`.
pub fn two_step_is_tighter(b: &ErrorBudget) -> Result<bool> {
    b.check_k()?;
    b.check_rank()?;
    open_unit("epsilon", b.epsilon)?;
    open_unit("eta", b.eta)?;
    let two_step = sample_complexity_real(b.rank as f64, b.g(), b.epsilon, b.eta, b.d2());
    let direct = (1.0 / b.f()) * (8.0 / (3.0 * b.epsilon * b.epsilon)) * (b.d2() / b.eta).ln();
    Ok(two_step < direct)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRegion {
    pub frobenius_radius: f64,
    pub trace_radius: f64,
    /// Rank hypothesis minimising the Frobenius radius.
    pub chosen_r: usize,
    pub chosen_delta: f64,
    /// Rank hypothesis minimising the trace radius.
    pub trace_chosen_r: usize,
    pub trace_chosen_delta: f64,
}

/// Operator-norm distance from a spectrum to its best-effort rank-`r` state: zero the tail,
/// shift the top `r` eigenvalues up uniformly to restore unit trace.
pub fn certified_delta(spectrum_desc: &[f64], r: usize) -> f64 {
    let top: f64 = spectrum_desc[..r].iter().sum();
    let tail = spectrum_desc.get(r).copied().unwrap_or(0.0).max(0.0);
    let shift = ((1.0 - top) / r as f64).max(0.0);
    tail.max(shift)
}

/// Sampling term `√(8 ln(d²/η) / (3 N g))`.
fn sampling_term(b: &ErrorBudget) -> f64 {
    (8.0 * (b.d2() / b.eta).ln() / (3.0 * b.shots as f64 * b.g())).sqrt()
}

pub fn frobenius_radius(b: &ErrorBudget, r: usize, delta: f64) -> f64 {
    (2.0 * r as f64).sqrt() * (delta + 2.0 * sampling_term(b))
}

pub fn trace_radius(b: &ErrorBudget, r: usize, delta: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    r as f64 * ((4.0 * s2 + 2.0) * delta + (4.0 + 8.0 * s2) * sampling_term(b))
}

/// Confidence balls around the projected estimate from the spectrum of the trace-one
/// thresholded estimate. Scans every rank hypothesis; `rank`, `delta` and `epsilon` of the
/// budget are ignored.
pub fn confidence_region(spectrum_desc: &[f64], b: &ErrorBudget) -> Result<ConfidenceRegion> {
    if spectrum_desc.is_empty() {
        return Err(QptError::InvalidInput("confidence region needs a nonempty spectrum".into()));
    }
    b.check_k()?;
    open_unit("eta", b.eta)?;
    if b.shots == 0 {
        return Err(QptError::Domain("confidence region needs at least one shot".into()));
    }
    let mut out = ConfidenceRegion {
        frobenius_radius: f64::INFINITY,
        trace_radius: f64::INFINITY,
        chosen_r: 0,
        chosen_delta: 0.0,
        trace_chosen_r: 0,
        trace_chosen_delta: 0.0,
    };
    for r in 1..=spectrum_desc.len() {
        let delta = certified_delta(spectrum_desc, r);
        let fr = frobenius_radius(b, r, delta);
        if fr < out.frobenius_radius {
            out.frobenius_radius = fr;
            out.chosen_r = r;
            out.chosen_delta = delta;
        }
        let tr = trace_radius(b, r, delta);
        if tr < out.trace_radius {
            out.trace_radius = tr;
            out.trace_chosen_r = r;
            out.trace_chosen_delta = delta;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn design_constants() {
        assert!(rel(g_factor(Scenario::PauliChoi, 1), 1.0 / 9.0) < 1e-15);
        assert!(rel(g_factor(Scenario::MubChoi, 1), 1.0 / 8.0) < 1e-15);
        assert!(rel(f_factor(Scenario::MubIo, 1), 1.0 / 64.0) < 1e-15);
        for s in Scenario::ALL {
            for k in 1..6 {
                assert!(rel(f_factor(s, k), g_factor(s, k) / 4f64.powi(k as i32)) < 1e-15);
            }
        }
    }

    #[test]
    fn frobenius_bound_value() {
        let b = ErrorBudget::new(Scenario::MubChoi, 1, 100_000).with_epsilon(0.1);
        let p = pls_failure_prob(&b, BoundNorm::Frobenius).unwrap();
        assert!(rel(p, 4.0 * (-375.0f64 / 64.0).exp()) < 1e-12);
        let vacuous = ErrorBudget::new(Scenario::MubChoi, 1, 0).with_epsilon(0.1);
        assert_eq!(pls_failure_prob(&vacuous, BoundNorm::Frobenius).unwrap(), 1.0);
        assert!(matches!(
            pls_failure_prob(&b.with_epsilon(1.0), BoundNorm::Frobenius),
            Err(QptError::Domain(_))
        ));
    }

    #[test]
    fn sample_complexity_value() {
        let b = ErrorBudget::new(Scenario::MubChoi, 1, 0).with_epsilon(0.1).with_eta(0.01);
        let expect = (256.0 * (8.0 / 0.03) * 400f64.ln()).ceil() as u64;
        assert_eq!(sample_complexity(&b).unwrap(), expect);
        assert_eq!(expect, 409_018);
        let pauli = ErrorBudget { scenario: Scenario::PauliChoi, ..b };
        let ratio = sample_complexity_real(1.0, pauli.g(), 0.1, 0.01, 4.0) / sample_complexity_real(1.0, b.g(), 0.1, 0.01, 4.0);
        assert!(rel(ratio, 1.5f64.powi(2) / 2.0) < 1e-12);
    }

    #[test]
    fn ls_bound_value() {
        let b = ErrorBudget::new(Scenario::PauliChoi, 1, 10_000).with_epsilon(0.1);
        let p = ls_failure_prob(&b, BoundNorm::Operator).unwrap();
        assert!(rel(p, 4.0 * (-(3e4 * 0.01 / 8.0) / 9.0f64).exp()) < 1e-12);
        assert!((p - 0.0621).abs() < 1e-4);
        let hi = ls_failure_prob(&b.with_epsilon(1.0), BoundNorm::Operator).unwrap();
        let mid = ls_failure_prob(&b.with_epsilon(0.5), BoundNorm::Operator).unwrap();
        assert!(hi <= mid);
    }

    #[test]
    fn crossover_at_d2_over_32() {
        // k = 4: d² = 256, crossover at r = 8.
        let b = ErrorBudget::new(Scenario::MubChoi, 4, 0).with_epsilon(0.1).with_eta(0.01);
        let direct = (1.0 / b.f()) * (8.0 / (3.0 * 0.01)) * (256.0f64 / 0.01).ln();
        let two = sample_complexity_real(8.0, b.g(), 0.1, 0.01, 256.0);
        assert!(rel(two, direct) < 1e-12);
        assert!(two_step_is_tighter(&b.with_rank(7)).unwrap());
        assert!(!two_step_is_tighter(&b.with_rank(8)).unwrap());
        assert!(!two_step_is_tighter(&b.with_rank(9)).unwrap());
        for s in Scenario::ALL {
            let one = ErrorBudget::new(s, 1, 0).with_epsilon(0.1).with_eta(0.01);
            assert!(!two_step_is_tighter(&one).unwrap());
        }
    }

    #[test]
    fn pure_spectrum_region() {
        let b = ErrorBudget::new(Scenario::MubChoi, 1, 1_000_000);
        let reg = confidence_region(&[1.0, 0.0, 0.0, 0.0], &b).unwrap();
        assert_eq!(reg.chosen_r, 1);
        assert_eq!(reg.chosen_delta, 0.0);
        let huge = ErrorBudget::new(Scenario::MubChoi, 1, u64::MAX);
        let reg = confidence_region(&[0.7, 0.2, 0.1, 0.0], &huge).unwrap();
        // Sampling term ~1e-9: radius ≈ min_r √(2r) δ(r).
        let limit = (1..=4)
            .map(|r| (2.0 * r as f64).sqrt() * certified_delta(&[0.7, 0.2, 0.1, 0.0], r))
            .fold(f64::INFINITY, f64::min);
        assert!((reg.frobenius_radius - limit).abs() < 1e-7);
        assert!(confidence_region(&[], &b).is_err());
    }

    #[test]
    fn region_matches_exhaustive_scan() {
        let spec = [0.55, 0.35, 0.06, 0.04];
        let b = ErrorBudget::new(Scenario::MubChoi, 1, 1_000_000);
        let reg = confidence_region(&spec, &b).unwrap();
        let mut best = (f64::INFINITY, 0);
        for r in 1..=4 {
            let top: f64 = spec[..r].iter().sum();
            let tail = if r < 4 { spec[r] } else { 0.0 };
            let delta = tail.max((1.0 - top) / r as f64);
            let t = (8.0 * (4.0f64 / 0.05).ln() / (3.0 * 1e6 / 8.0)).sqrt();
            let rad = (2.0 * r as f64 * (delta + 2.0 * t).powi(2)).sqrt();
            if rad < best.0 {
                best = (rad, r);
            }
        }
        assert!(rel(reg.frobenius_radius, best.0) < 1e-12);
        assert_eq!(reg.chosen_r, best.1);
    }

    proptest! {
        #[test]
        fn monotone_in_shots_and_rank(n in 1u64..10_000_000, r in 1usize..8, eps in 0.01f64..0.99) {
            let b = ErrorBudget::new(Scenario::PauliChoi, 2, n).with_rank(r).with_epsilon(eps);
            for norm in [BoundNorm::Frobenius, BoundNorm::Trace] {
                let p = pls_failure_prob_raw(&b, norm).unwrap();
                let more = pls_failure_prob_raw(&ErrorBudget { shots: n * 2, ..b }, norm).unwrap();
                let higher = pls_failure_prob_raw(&b.with_rank(r + 1), norm).unwrap();
                prop_assert!(more <= p && higher >= p);
            }
            // Doubling r halves the Frobenius exponent.
            let e1 = pls_exponent(&b, BoundNorm::Frobenius).unwrap();
            let e2 = pls_exponent(&b.with_rank(2 * r), BoundNorm::Frobenius).unwrap();
            prop_assert!((e2 - e1 / 2.0).abs() <= 1e-9 * e1.max(1.0));
        }

        #[test]
        fn sample_complexity_is_sufficient(eps in 0.01f64..0.99, eta in 0.001f64..0.999, r in 1usize..=4, sel in 0usize..4, k in 1u32..4) {
            let s = Scenario::ALL[sel];
            let b = ErrorBudget::new(s, k, 0).with_rank(r).with_epsilon(eps).with_eta(eta);
            let n = sample_complexity(&b).unwrap();
            let p = pls_failure_prob_raw(&ErrorBudget { shots: n, ..b }, BoundNorm::Frobenius).unwrap();
            prop_assert!(p <= eta);
            let halved = sample_complexity(&b.with_epsilon(eps / 2.0)).unwrap();
            let exact = sample_complexity_real(r as f64, b.g(), eps / 2.0, eta, b.d2()) / sample_complexity_real(r as f64, b.g(), eps, eta, b.d2());
            prop_assert!((exact - 4.0).abs() < 1e-12);
            prop_assert!(halved >= 4 * n - 4 && halved <= 4 * n);
        }
    }
}
