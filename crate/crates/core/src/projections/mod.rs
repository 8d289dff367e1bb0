// SPDX-License-Identifier: Apache-2.0

//! Projections onto physical channels.
//!
//! `𝒞𝒫` is the PSD cone, `𝒯𝒫` the affine set `Tr_s Φ = 𝟙/d`. The two-step
//! pipeline thresholds the least-squares estimate onto trace-one PSD matrices
//! and then moves it into `𝒞𝒫𝒯𝒫` with one of the iterative methods in
//! [`Method`], finishing with a depolarizing mix that cancels the residual
//! negative eigenvalue.
//!
//! Every iterative method counts one `proj_cp` call per eigendecomposition used
//! to project onto the cone.

mod cp1;
mod dual;
mod dykstra;
mod hip;

use std::fmt;
use std::str::FromStr;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::channel::{partial_trace_unchecked, ChoiMatrix, Subsystem};
use crate::error::{QptError, Result};
use crate::estimators::LsEstimate;
use crate::linalg::{self, r, CMatrix, HermitianEigen};
use crate::tolerances;

pub use cp1::{proj_cp1, proj_cp1_thresholded, threshold_spectrum, Cp1Result};
pub use dual::{dual_objective, relaxed_primal};
pub use hip::{hip_inner, HalfSpace, HipInner};

/// Iterative method for the second projection step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Alternating projections onto `𝒞𝒫` and `𝒯𝒫`.
    Ap,
    Dykstra,
    /// HIP keeping only the newest half-space, never switching to AP.
    OneHip,
    /// HIP with half-space memory, never switching to AP.
    PureHip,
    /// Fixed schedule of AP steps and HIP steps.
    HipSwitch,
    /// Quasi-Newton ascent on the Lagrange dual.
    Dual,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Ap,
        Method::Dykstra,
        Method::OneHip,
        Method::PureHip,
        Method::HipSwitch,
        Method::Dual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ap => "AP",
            Method::Dykstra => "Dykstra",
            Method::OneHip => "oneHIP",
            Method::PureHip => "pureHIP",
            Method::HipSwitch => "HIPswitch",
            Method::Dual => "dual",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = QptError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "ap" => Ok(Method::Ap),
            "dykstra" => Ok(Method::Dykstra),
            "onehip" => Ok(Method::OneHip),
            "purehip" => Ok(Method::PureHip),
            "hipswitch" | "hip" => Ok(Method::HipSwitch),
            "dual" => Ok(Method::Dual),
            _ => Err(QptError::Parse(format!(
                "unknown method '{s}'; expected one of AP, Dykstra, oneHIP, pureHIP, HIPswitch, dual"
            ))),
        }
    }
}

/// Iteration mode recorded in the λ_min trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Init,
    Ap,
    Hip,
    Dykstra,
    Dual,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Init => "init",
            Mode::Ap => "AP",
            Mode::Hip => "HIP",
            Mode::Dykstra => "Dykstra",
            Mode::Dual => "dual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionConfig {
    /// Stop once `λ_min ≥ -epsilon`.
    pub epsilon: f64,
    /// AP steps per HIPswitch cycle.
    pub ap_steps: usize,
    /// HIP steps per HIPswitch cycle.
    pub hip_steps: usize,
    pub max_halfspaces: usize,
    pub max_outer_iterations: usize,
    /// Dual stopping tolerance on `‖Tr_s Φ_rel(ν) - 𝟙/d‖_F`.
    pub dual_gradient_tol: f64,
    pub dual_max_iterations: usize,
    /// Extra Dykstra stopping rule on the iterate change `‖x_{k+1} - x_k‖_F`; 0 disables it.
    pub dykstra_step_tol: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-7,
            ap_steps: 6,
            hip_steps: 30,
            max_halfspaces: 30,
            max_outer_iterations: 5000,
            dual_gradient_tol: 1e-8,
            dual_max_iterations: 2000,
            dykstra_step_tol: 0.0,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.epsilon > 0.0
            && self.ap_steps > 0
            && self.hip_steps > 0
            && self.max_halfspaces > 0
            && self.max_outer_iterations > 0
            && self.dual_gradient_tol > 0.0
            && self.dual_max_iterations > 0
            && self.dykstra_step_tol >= 0.0;
        if !positive {
            return Err(QptError::Config(format!("projection settings must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// One row of the λ_min trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub mode: Mode,
    pub lambda_min: f64,
    pub cum_proj_cp_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub method: Method,
    pub iterations: usize,
    pub proj_cp_calls: usize,
    pub trace: Vec<TraceRow>,
    /// λ_min of the last iterate, before the depolarizing mix.
    pub final_lambda_min: f64,
    pub mixing_p: f64,
    pub converged: bool,
    /// Dual method only: final `‖Tr_s Φ_rel - 𝟙/d‖_F`.
    pub dual_gradient_norm: Option<f64>,
}

impl ProjectionReport {
    pub fn lambda_min_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|t| t.lambda_min).collect()
    }
}

/// An iterate handed to observers: always a `𝒯𝒫` matrix.
#[derive(Debug, Clone, Copy)]
pub struct Iterate<'a> {
    pub iteration: usize,
    pub mode: Mode,
    pub matrix: &'a CMatrix,
    pub lambda_min: f64,
}

/// Channel dimension of a `d² x d²` matrix.
pub fn choi_dim(m: &CMatrix) -> Result<usize> {
    let n = m.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if !m.is_square() || d * d != n || d < 2 {
        return Err(QptError::InvalidDimension(format!(
            "{}x{} is not the shape of a Choi matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(d)
}

/// `X + (1/d) 𝟙 ⊗ (𝟙/d - Tr_s X)`.
pub fn proj_tp(x: &CMatrix) -> Result<CMatrix> {
    let d = choi_dim(x)?;
    Ok(proj_tp_unchecked(x, d))
}

pub(crate) fn proj_tp_unchecked(x: &CMatrix, d: usize) -> CMatrix {
    let ts = partial_trace_unchecked(x, d, Subsystem::System);
    let inv = 1.0 / d as f64;
    let corr = (CMatrix::identity(d, d) * r(inv) - ts) * r(inv);
    add_identity_kron(x, &corr, d)
}

/// Projection onto the linear space `Tr_s X = 0`.
pub(crate) fn proj_tp_linear(x: &CMatrix, d: usize) -> CMatrix {
    let ts = partial_trace_unchecked(x, d, Subsystem::System);
    add_identity_kron(x, &(ts * r(-1.0 / d as f64)), d)
}

/// `x + 𝟙_d ⊗ m`.
pub(crate) fn add_identity_kron(x: &CMatrix, m: &CMatrix, d: usize) -> CMatrix {
    let mut out = x.clone();
    for s in 0..d {
        for i in 0..d {
            for j in 0..d {
                out[(s * d + i, s * d + j)] += m[(i, j)];
            }
        }
    }
    out
}

fn check_hermitian(x: &CMatrix) -> Result<()> {
    let scale = linalg::frobenius_norm(x).max(1.0);
    let defect = linalg::hermiticity_defect(x);
    if !x.is_square() || defect > tolerances::STRUCTURAL * scale {
        return Err(QptError::InvalidInput(format!(
            "projection needs a Hermitian matrix (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Positive part `Σ max(0, ξ_i) |x_i><x_i|`.
pub fn proj_cp(x: &CMatrix) -> Result<CMatrix> {
    check_hermitian(x)?;
    Ok(positive_part(&linalg::eigh(x)?))
}

pub(crate) fn positive_part(evd: &HermitianEigen) -> CMatrix {
    let w: Vec<f64> = evd.values.iter().map(|&x| x.max(0.0)).collect();
    evd.rebuild(&w)
}

/// Mix a `𝒯𝒫` matrix with `𝟙/d²` just enough to cancel its least eigenvalue.
///
/// Returns the mixed matrix and the weight `p` solving `(1-p) λ_min + p/d² = 0`.
pub fn depolarizing_finalize(phi: &CMatrix) -> Result<(ChoiMatrix, f64)> {
    let lmin = linalg::min_eigenvalue(phi)?;
    finalize_with(phi, lmin)
}

pub(crate) fn finalize_with(phi: &CMatrix, lmin: f64) -> Result<(ChoiMatrix, f64)> {
    let d = choi_dim(phi)?;
    let ts = partial_trace_unchecked(phi, d, Subsystem::System);
    let defect = linalg::frobenius_norm(&(ts - CMatrix::identity(d, d) * r(1.0 / d as f64)));
    if defect > 1e-9 {
        return Err(QptError::ConstraintViolation(format!(
            "finalization needs a trace-preserving matrix (defect {defect:.3e})"
        )));
    }
    if lmin < tolerances::FINALIZE_LIMIT {
        return Err(QptError::NotConverged(format!(
            "least eigenvalue {lmin:.3e} is below {}",
            tolerances::FINALIZE_LIMIT
        )));
    }
    let phi = linalg::hermitian_part(phi);
    if lmin >= 0.0 {
        return Ok((ChoiMatrix::from_trusted(d, phi), 0.0));
    }
    let d2 = (d * d) as f64;
    let p = -lmin * d2 / (1.0 - lmin * d2);
    let mixed = phi * r(1.0 - p) + CMatrix::identity(d * d, d * d) * r(p / d2);
    Ok((ChoiMatrix::from_trusted(d, mixed), p))
}

/// Project a Hermitian trace-one matrix onto `𝒞𝒫𝒯𝒫`.
pub fn project_to_cptp(
    phi0: &CMatrix,
    method: Method,
    cfg: &ProjectionConfig,
) -> Result<(ChoiMatrix, ProjectionReport)> {
    project_to_cptp_observed(phi0, method, cfg, &mut |_| {})
}

/// [`project_to_cptp`] with a callback on every `𝒯𝒫` iterate.
pub fn project_to_cptp_observed(
    phi0: &CMatrix,
    method: Method,
    cfg: &ProjectionConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<(ChoiMatrix, ProjectionReport)> {
    cfg.validate()?;
    check_hermitian(phi0)?;
    let d = choi_dim(phi0)?;
    let tr = linalg::trace(phi0).re;
    if (tr - 1.0).abs() > tolerances::STRUCTURAL {
        return Err(QptError::ConstraintViolation(format!(
            "projection input has trace {tr}"
        )));
    }
    let phi0 = linalg::hermitian_part(phi0);

    let tp_defect = linalg::frobenius_norm(&(proj_tp_unchecked(&phi0, d) - &phi0));
    if tp_defect <= tolerances::STRUCTURAL {
        let lmin = linalg::min_eigenvalue(&phi0)?;
        if lmin >= tolerances::PSD {
            observer(&Iterate { iteration: 0, mode: Mode::Init, matrix: &phi0, lambda_min: lmin });
            let report = ProjectionReport {
                method,
                iterations: 0,
                proj_cp_calls: 0,
                trace: vec![TraceRow { iteration: 0, mode: Mode::Init, lambda_min: lmin, cum_proj_cp_calls: 0 }],
                final_lambda_min: lmin,
                mixing_p: 0.0,
                converged: true,
                dual_gradient_norm: None,
            };
            return Ok((ChoiMatrix::from_trusted(d, phi0), report));
        }
    }

    let out = match method {
        Method::Ap | Method::OneHip | Method::PureHip | Method::HipSwitch => {
            hip::run(&phi0, d, method, cfg, observer)?
        }
        Method::Dykstra => dykstra::run(&phi0, d, cfg, observer)?,
        Method::Dual => dual::run(&phi0, d, cfg, observer)?,
    };
    let (matrix, lmin, mut report) = out;
    if !report.converged {
        debug!("{method}: stopped after {} iterations at λ_min = {lmin:.3e}", report.iterations);
    }
    let (choi, p) = finalize_with(&matrix, lmin)?;
    report.final_lambda_min = lmin;
    report.mixing_p = p;
    Ok((choi, report))
}

/// Outcome of a projection method before finalization: iterate, its λ_min, report.
pub(crate) type RawOutcome = (CMatrix, f64, ProjectionReport);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub method: Method,
    pub projection: ProjectionConfig,
    /// Skip the trace-one thresholding and project the LS estimate directly.
    pub direct: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: Method::HipSwitch,
            projection: ProjectionConfig::default(),
            direct: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlsOutput {
    pub estimate: ChoiMatrix,
    /// Result of the first step; the LS estimate itself in direct mode.
    pub cp1: CMatrix,
    pub tau: f64,
    pub cp1_rank: usize,
    pub report: ProjectionReport,
}

/// LS estimate → thresholded trace-one PSD → `𝒞𝒫𝒯𝒫`.
pub fn pls_pipeline(ls: &LsEstimate, cfg: &PipelineConfig) -> Result<PlsOutput> {
    pls_pipeline_observed(ls, cfg, &mut |_| {})
}

pub fn pls_pipeline_observed(
    ls: &LsEstimate,
    cfg: &PipelineConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<PlsOutput> {
    let (start, tau, rank) = first_step(ls, cfg.direct)?;
    let (estimate, report) = project_to_cptp_observed(&start, cfg.method, &cfg.projection, observer)?;
    Ok(PlsOutput { estimate, cp1: start, tau, cp1_rank: rank, report })
}

/// Input to the `𝒞𝒫𝒯𝒫` step: the thresholded trace-one PSD matrix (or the trace-fixed LS
/// estimate in direct mode), the threshold and the rank.
pub fn first_step(ls: &LsEstimate, direct: bool) -> Result<(CMatrix, f64, usize)> {
    let m = linalg::hermitian_part(&ls.matrix);
    Ok(if direct {
        // Trace may be off by sampling noise in scenario 4; the projection input must be trace one.
        let t = linalg::trace(&m).re;
        let fixed = if (t - 1.0).abs() > tolerances::STRUCTURAL {
            let n = m.nrows();
            m.clone() + CMatrix::identity(n, n) * r((1.0 - t) / n as f64)
        } else {
            m.clone()
        };
        let rank = linalg::eigvalsh(&fixed)?.iter().filter(|&&x| x > tolerances::RANK).count();
        (fixed, 0.0, rank)
    } else {
        let tau = (-linalg::min_eigenvalue(&m)?).max(0.0);
        let cp1 = proj_cp1_thresholded(&renormalise_trace(&m), tau)?;
        (cp1.matrix, tau, cp1.rank)
    })
}

/// Scenario-4 estimates have trace `1 ± 1e-8`; shift along 𝟙 to make it exact.
fn renormalise_trace(m: &CMatrix) -> CMatrix {
    let t = linalg::trace(m).re;
    if (t - 1.0).abs() <= 1e-14 {
        return m.clone();
    }
    let n = m.nrows();
    m + CMatrix::identity(n, n) * r((1.0 - t) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_of, maximally_entangled_state, ChannelKind, ChannelSpec, UnitarySpec};
    use crate::linalg::{frobenius_norm, random_hermitian};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| r(x))))
    }

    #[test]
    fn tp_projection_examples() {
        let om = maximally_entangled_state(2).unwrap().into_matrix();
        assert!(frobenius_norm(&(proj_tp(&om).unwrap() - &om)) < 1e-15);
        let e00 = diag(&[1.0, 0.0, 0.0, 0.0]);
        let p = proj_tp(&e00).unwrap();
        assert!(frobenius_norm(&(p - diag(&[0.75, 0.25, -0.25, 0.25]))) < 1e-15);
    }

    #[test]
    fn cp_projection_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = linalg::random_unitary(3, &mut rng);
        let x = &u * diag(&[0.9, 0.4, -0.3]) * u.adjoint();
        let expect = &u * diag(&[0.9, 0.4, 0.0]) * u.adjoint();
        assert!(frobenius_norm(&(proj_cp(&x).unwrap() - expect)) < 1e-14);
        let psd = &u * diag(&[0.9, 0.4, 0.1]) * u.adjoint();
        assert!(frobenius_norm(&(proj_cp(&psd).unwrap() - &psd)) < 1e-14);
        let mut skew = psd.clone();
        skew[(0, 1)] += r(1.0);
        assert!(matches!(proj_cp(&skew), Err(QptError::InvalidInput(_))));
    }

    #[test]
    fn finalize_examples() {
        let id = choi_of(&ChannelSpec::new(ChannelKind::Identity, 2)).unwrap();
        let (out, p) = depolarizing_finalize(id.matrix()).unwrap();
        assert_eq!(p, 0.0);
        assert_eq!(out.matrix(), id.matrix());

        // Push one eigenvalue of a TP matrix to -1e-7 by mixing towards a non-PSD TP point.
        let d = 4;
        let phi = choi_of(&ChannelSpec::new(ChannelKind::Unitary { unitary: UnitarySpec::Qft }, d)).unwrap();
        let (_, lmin) = (0, -1e-7);
        let (out, p) = finalize_with(phi.matrix(), lmin).unwrap();
        let expect = 16e-7 / (1.0 + 16e-7);
        assert!((p - expect).abs() < 1e-18);
        assert!(out.tp_defect() < 1e-14);

        assert!(matches!(finalize_with(phi.matrix(), -0.2), Err(QptError::NotConverged(_))));
        let not_tp = diag(&[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(depolarizing_finalize(&not_tp), Err(QptError::ConstraintViolation(_))));
    }

    #[test]
    fn physical_input_is_returned_unchanged() {
        let phi = choi_of(&ChannelSpec::new(ChannelKind::NoisyQft { measure_prob: 0.25 }, 4)).unwrap();
        for method in Method::ALL {
            let (out, rep) = project_to_cptp(phi.matrix(), method, &ProjectionConfig::default()).unwrap();
            assert_eq!(out.matrix(), phi.matrix());
            assert_eq!(rep.iterations, 0);
            assert_eq!(rep.mixing_p, 0.0);
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("newton".parse::<Method>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tp_projection_is_an_orthogonal_projection(seed in any::<u64>(), dsel in 0usize..2) {
            let d = [2, 3][dsel];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_hermitian(d * d, &mut rng);
            let px = proj_tp(&x).unwrap();
            let ts = partial_trace_unchecked(&px, d, Subsystem::System);
            prop_assert!(frobenius_norm(&(ts - CMatrix::identity(d, d) * r(1.0 / d as f64))) < 1e-12);
            prop_assert!(frobenius_norm(&(proj_tp(&px).unwrap() - &px)) < 1e-12);
            // Any TP point: project another random matrix.
            let y = proj_tp(&random_hermitian(d * d, &mut rng)).unwrap();
            let lhs = frobenius_norm(&(&x - &y)).powi(2);
            let rhs = frobenius_norm(&(&px - &y)).powi(2) + frobenius_norm(&(&x - &px)).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs));
            prop_assert!(frobenius_norm(&(&px - &y)) <= frobenius_norm(&(&x - &y)) + 1e-12);
        }

        #[test]
        fn cp_projection_is_idempotent_and_nonexpansive(seed in any::<u64>(), n in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_hermitian(n, &mut rng);
            let px = proj_cp(&x).unwrap();
            prop_assert!(linalg::min_eigenvalue(&px).unwrap() >= -1e-12);
            prop_assert!(frobenius_norm(&(proj_cp(&px).unwrap() - &px)) < 1e-12);
            let g = linalg::random_ginibre(n, 2, &mut rng);
            let y = &g * g.adjoint();
            prop_assert!(frobenius_norm(&(&px - &y)) <= frobenius_norm(&(&x - &y)) + 1e-12);
        }
    }
}
