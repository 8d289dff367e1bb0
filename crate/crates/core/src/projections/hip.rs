// SPDX-License-Identifier: Apache-2.0

//! Alternating projections and the hyperplane-intersection family.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use log::debug;

use super::{
    choi_dim, positive_part, proj_tp_linear, proj_tp_unchecked, Iterate, Method, Mode,
    ProjectionConfig, ProjectionReport, RawOutcome, TraceRow,
};
use crate::channel::{partial_trace_unchecked, Subsystem};
use crate::error::{QptError, Result};
use crate::linalg::{self, r, CMatrix};
use crate::tolerances;

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

/// `{Y : ⟨normal, Y⟩ ≥ offset}` with a unit-norm Hermitian normal.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    id: u64,
    normal: CMatrix,
    offset: f64,
    /// Normal projected onto the linear space `Tr_s X = 0`.
    tp_normal: CMatrix,
}

impl HalfSpace {
    /// Normalises `normal`; errors on a zero or non-Hermitian normal.
    pub fn new(normal: CMatrix, offset: f64) -> Result<Self> {
        let d = choi_dim(&normal)?;
        let norm = linalg::frobenius_norm(&normal);
        if norm == 0.0 || !norm.is_finite() {
            return Err(QptError::InvalidInput("half-space normal must be nonzero".into()));
        }
        if linalg::hermiticity_defect(&normal) > tolerances::STRUCTURAL * norm {
            return Err(QptError::InvalidInput("half-space normal must be Hermitian".into()));
        }
        let normal = linalg::hermitian_part(&normal) * r(1.0 / norm);
        let tp_normal = proj_tp_linear(&normal, d);
        Ok(Self {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            normal,
            offset: offset / norm,
            tp_normal,
        })
    }

    /// The half-space containing the PSD cone that is orthogonal to `phi_cp - phi` at `phi_cp`,
    /// where `phi_cp` is the PSD projection of `phi`.
    pub fn supporting(phi: &CMatrix, phi_cp: &CMatrix) -> Result<Self> {
        let n = phi_cp - phi;
        let offset = linalg::inner(&n, phi_cp);
        Self::new(n, offset)
    }

    pub fn normal(&self) -> &CMatrix {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `⟨normal, Y⟩ - offset`; non-negative inside.
    pub fn slack(&self, y: &CMatrix) -> f64 {
        linalg::inner(&self.normal, y) - self.offset
    }
}

/// Reusable solver for the inner hyperplane selection; caches Gram entries by half-space identity.
#[derive(Debug, Default)]
pub struct HipInner {
    gram: HashMap<(u64, u64), f64>,
}

impl HipInner {
    pub fn new() -> Self {
        Self::default()
    }

    fn gram(&mut self, a: &HalfSpace, b: &HalfSpace) -> f64 {
        let key = if a.id <= b.id { (a.id, b.id) } else { (b.id, a.id) };
        *self
            .gram
            .entry(key)
            .or_insert_with(|| linalg::inner(&a.tp_normal, &b.tp_normal))
    }

    /// Select half-spaces greedily in list order and project `phi` onto `𝒯𝒫` ∩ their hyperplanes.
    ///
    /// A half-space joins the active set when the joint hyperplane projection keeps every
    /// Lagrange coefficient non-negative. Half-spaces whose projected normal is numerically
    /// dependent on the active ones are dropped. Returns the active indices into `list`,
    /// their coefficients, and the projected point.
    pub fn project(&mut self, list: &[HalfSpace], phi: &CMatrix) -> (Vec<usize>, Vec<f64>, CMatrix) {
        let rhs: Vec<f64> = list.iter().map(|h| h.offset - linalg::inner(&h.normal, phi)).collect();
        let mut active: Vec<usize> = Vec::new();
        // Lower Cholesky factor of the active Gram matrix, row-major rows of growing length.
        let mut chol: Vec<Vec<f64>> = Vec::new();
        let mut coeffs: Vec<f64> = Vec::new();

        for (w, h) in list.iter().enumerate() {
            let gww = self.gram(h, h);
            let col: Vec<f64> = active.iter().map(|&a| self.gram(&list[a], h)).collect();
            let row = forward_solve(&chol, &col);
            let pivot2 = gww - row.iter().map(|x| x * x).sum::<f64>();
            if gww <= 0.0 || pivot2 <= tolerances::GRAM_PIVOT * gww {
                debug!("dropping half-space {} with dependent normal (pivot² {pivot2:.3e})", h.id);
                continue;
            }
            let mut trial = chol.clone();
            let mut new_row = row;
            new_row.push(pivot2.sqrt());
            trial.push(new_row);
            let b: Vec<f64> = active.iter().chain(std::iter::once(&w)).map(|&i| rhs[i]).collect();
            let c = cholesky_solve(&trial, &b);
            if c.iter().all(|&x| x >= -tolerances::HIP_COEFFICIENT) {
                active.push(w);
                chol = trial;
                coeffs = c;
            }
        }

        let mut out = phi.clone();
        for (&i, &ci) in active.iter().zip(&coeffs) {
            out += &list[i].tp_normal * r(ci);
        }
        (active, coeffs, out)
    }
}

fn forward_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(b.len());
    for i in 0..b.len() {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y.push((b[i] - s) / l[i][i]);
    }
    y
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let y = forward_solve(l, b);
    let n = y.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    x
}

/// Inner hyperplane selection on a `𝒯𝒫` point; returns the active half-spaces and the new point.
pub fn hip_inner(halfspaces: &[HalfSpace], phi: &CMatrix) -> Result<(Vec<HalfSpace>, CMatrix)> {
    let d = choi_dim(phi)?;
    let ts = partial_trace_unchecked(phi, d, Subsystem::System);
    let defect = linalg::frobenius_norm(&(ts - CMatrix::identity(d, d) * r(1.0 / d as f64)));
    if defect > 1e-9 {
        return Err(QptError::ConstraintViolation(format!(
            "inner hyperplane step needs a trace-preserving point (defect {defect:.3e})"
        )));
    }
    for h in halfspaces {
        if h.normal.nrows() != phi.nrows() {
            return Err(QptError::DimensionMismatch { expected: phi.nrows(), found: h.normal.nrows() });
        }
    }
    let (active, _, out) = HipInner::new().project(halfspaces, phi);
    Ok((active.into_iter().map(|i| halfspaces[i].clone()).collect(), out))
}

/// AP, oneHIP, pureHIP and HIPswitch.
pub(super) fn run(
    phi0: &CMatrix,
    d: usize,
    method: Method,
    cfg: &ProjectionConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<RawOutcome> {
    let mut phi = proj_tp_unchecked(phi0, d);
    let mut evd = linalg::eigh(&phi)?;
    let mut calls = 1;
    let mut lmin = evd.min();
    let mut trace = vec![TraceRow { iteration: 0, mode: Mode::Init, lambda_min: lmin, cum_proj_cp_calls: calls }];
    observer(&Iterate { iteration: 0, mode: Mode::Init, matrix: &phi, lambda_min: lmin });

    let mut mode = match method {
        Method::Ap | Method::HipSwitch => Mode::Ap,
        _ => Mode::Hip,
    };
    let mut in_mode = 0;
    let mut list: VecDeque<HalfSpace> = VecDeque::new();
    let mut solver = HipInner::new();
    let mut it = 0;

    while lmin < -cfg.epsilon && it < cfg.max_outer_iterations {
        let phi_cp = positive_part(&evd);
        match mode {
            Mode::Ap => phi = proj_tp_unchecked(&phi_cp, d),
            _ => {
                let h = HalfSpace::supporting(&phi, &phi_cp)?;
                if method == Method::OneHip {
                    list.clear();
                }
                list.push_front(h);
                list.truncate(cfg.max_halfspaces);
                let (active, _, next) = solver.project(list.make_contiguous(), &phi);
                list = active.into_iter().map(|i| list[i].clone()).collect();
                phi = proj_tp_unchecked(&next, d);
            }
        }
        it += 1;
        in_mode += 1;
        evd = linalg::eigh(&phi)?;
        calls += 1;
        lmin = evd.min();
        trace.push(TraceRow { iteration: it, mode, lambda_min: lmin, cum_proj_cp_calls: calls });
        observer(&Iterate { iteration: it, mode, matrix: &phi, lambda_min: lmin });

        if method == Method::HipSwitch {
            if mode == Mode::Ap && in_mode == cfg.ap_steps {
                mode = Mode::Hip;
                in_mode = 0;
                list.clear();
                solver = HipInner::new();
            } else if mode == Mode::Hip && in_mode == cfg.hip_steps {
                mode = Mode::Ap;
                in_mode = 0;
            }
        }
    }

    let report = ProjectionReport {
        method,
        iterations: it,
        proj_cp_calls: calls,
        trace,
        final_lambda_min: lmin,
        mixing_p: 0.0,
        converged: lmin >= -cfg.epsilon,
        dual_gradient_norm: None,
    };
    Ok((phi, lmin, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, inner, random_hermitian};
    use crate::projections::proj_tp;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tp_point(seed: u64, d: usize) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        proj_tp(&random_hermitian(d * d, &mut rng)).unwrap()
    }

    #[test]
    fn single_halfspace_gives_hyperplane_projection() {
        let d = 2;
        let phi = tp_point(1, d);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(d * d, &mut rng);
        let h0 = HalfSpace::new(a, 0.0).unwrap();
        // Put phi strictly outside by 0.3.
        let h = HalfSpace::new(h0.normal().clone(), h0.slack(&phi) + 0.3).unwrap();
        assert!((h.slack(&phi) + 0.3).abs() < 1e-12);
        let (active, out) = hip_inner(std::slice::from_ref(&h), &phi).unwrap();
        assert_eq!(active.len(), 1);
        // Hyperplane projection within TP: phi + c Ã with c = 0.3 / ‖Ã‖².
        let at = &h.tp_normal;
        let expect = &phi + at * r(0.3 / inner(at, at));
        assert!(frobenius_norm(&(out.clone() - expect)) < 1e-12);
        assert!(h.slack(&out).abs() < 1e-12);
    }

    #[test]
    fn inside_point_is_unchanged() {
        let d = 2;
        let phi = tp_point(3, d);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let hs: Vec<HalfSpace> = (0..3)
            .map(|_| {
                let h = HalfSpace::new(random_hermitian(d * d, &mut rng), 0.0).unwrap();
                let off = h.slack(&phi) - 0.5;
                HalfSpace::new(h.normal().clone(), off).unwrap()
            })
            .collect();
        let (active, out) = hip_inner(&hs, &phi).unwrap();
        assert!(active.is_empty());
        assert_eq!(out, phi);
    }

    #[test]
    fn negative_coefficient_excludes_second_halfspace() {
        let d = 2;
        let phi = tp_point(5, d);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a1 = HalfSpace::new(proj_tp_linear(&random_hermitian(d * d, &mut rng), d), 0.0).unwrap();
        // Second normal leans on the first so that moving onto hyperplane 1 increases its slack.
        let b = random_hermitian(d * d, &mut rng);
        let a2n = a1.normal() * r(1.0) + proj_tp_linear(&b, d) * r(0.3);
        let a2 = HalfSpace::new(a2n, 0.0).unwrap();
        let h1 = HalfSpace::new(a1.normal().clone(), a1.slack(&phi) + 0.2).unwrap();
        let h2 = HalfSpace::new(a2.normal().clone(), a2.slack(&phi) - 0.1).unwrap();
        assert!(h1.slack(&phi) < 0.0 && h2.slack(&phi) > 0.0);

        // The joint hyperplane projection needs a negative multiplier on h2.
        let mut solver = HipInner::new();
        let g11 = solver.gram(&h1, &h1);
        let g12 = solver.gram(&h1, &h2);
        let g22 = solver.gram(&h2, &h2);
        let (r1, r2) = (-h1.slack(&phi), -h2.slack(&phi));
        let det = g11 * g22 - g12 * g12;
        let c2 = (g11 * r2 - g12 * r1) / det;
        assert!(c2 < 0.0, "construction failed: c2 = {c2}");

        let list = vec![h1.clone(), h2.clone()];
        let (active, out) = hip_inner(&list, &phi).unwrap();
        assert_eq!(active, vec![h1.clone()]);
        assert!(h1.slack(&out) > -1e-12);
        assert!(h2.slack(&out) > -1e-12);
    }

    #[test]
    fn dependent_normal_is_dropped() {
        let d = 2;
        let phi = tp_point(7, d);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = HalfSpace::new(proj_tp_linear(&random_hermitian(d * d, &mut rng), d), 0.0).unwrap();
        let h1 = HalfSpace::new(base.normal().clone(), base.slack(&phi) + 0.1).unwrap();
        let h2 = HalfSpace::new(base.normal().clone(), base.slack(&phi) + 0.05).unwrap();
        let (active, out) = hip_inner(&[h1.clone(), h2], &phi).unwrap();
        assert_eq!(active, vec![h1.clone()]);
        assert!(h1.slack(&out).abs() < 1e-12);
    }

    #[test]
    fn non_tp_input_is_rejected() {
        let m = CMatrix::identity(4, 4) * r(0.5);
        assert!(matches!(hip_inner(&[], &m), Err(QptError::ConstraintViolation(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn result_is_kkt_point(seed in any::<u64>(), k in 1usize..6) {
            let d = 2;
            let phi = tp_point(seed, d);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
            let hs: Vec<HalfSpace> = (0..k).map(|_| {
                let h = HalfSpace::new(random_hermitian(d * d, &mut rng), 0.0).unwrap();
                let off = h.slack(&phi) + 0.2;
                HalfSpace::new(h.normal().clone(), off).unwrap()
            }).collect();
            let mut solver = HipInner::new();
            let (active, coeffs, out) = solver.project(&hs, &phi);
            prop_assert!(!active.is_empty());
            prop_assert!(coeffs.iter().all(|&c| c >= -1e-12));
            for &i in &active {
                prop_assert!(hs[i].slack(&out).abs() < 1e-9);
            }
            let ts = partial_trace_unchecked(&out, d, Subsystem::System);
            prop_assert!(frobenius_norm(&(ts - CMatrix::identity(d, d) * r(0.5))) < 1e-12);
        }
    }
}
