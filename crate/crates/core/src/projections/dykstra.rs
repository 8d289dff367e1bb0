// SPDX-License-Identifier: Apache-2.0

//! Dykstra's alternating projections with a correction term on the cone step.

use super::{positive_part, proj_tp_unchecked, Iterate, Method, Mode, ProjectionConfig, ProjectionReport, RawOutcome, TraceRow};
use crate::error::Result;
use crate::linalg::{self, CMatrix};

/// Iterates `y = P_CP(x + q)`, `q ← x + q - y`, `x = P_TP(y)` from `x = P_TP(Φ₀)`.
///
/// Starting from the `𝒯𝒫` projection does not change the limit, because `𝒯𝒫` is affine and
/// contains the target set.
pub(super) fn run(
    phi0: &CMatrix,
    d: usize,
    cfg: &ProjectionConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<RawOutcome> {
    let mut x = proj_tp_unchecked(phi0, d);
    let n = x.nrows();
    let mut q = CMatrix::zeros(n, n);
    let mut lmin = linalg::min_eigenvalue(&x)?;
    let mut calls = 0;
    let mut trace = vec![TraceRow { iteration: 0, mode: Mode::Init, lambda_min: lmin, cum_proj_cp_calls: calls }];
    observer(&Iterate { iteration: 0, mode: Mode::Init, matrix: &x, lambda_min: lmin });

    let mut it = 0;
    let mut step = f64::INFINITY;
    let need_step = cfg.dykstra_step_tol > 0.0;
    while (lmin < -cfg.epsilon || (need_step && step > cfg.dykstra_step_tol)) && it < cfg.max_outer_iterations {
        let shifted = &x + &q;
        let y = positive_part(&linalg::eigh(&shifted)?);
        calls += 1;
        q = shifted - &y;
        let next = proj_tp_unchecked(&y, d);
        if need_step {
            step = linalg::frobenius_norm(&(&next - &x));
        }
        x = next;
        it += 1;
        lmin = linalg::min_eigenvalue(&x)?;
        trace.push(TraceRow { iteration: it, mode: Mode::Dykstra, lambda_min: lmin, cum_proj_cp_calls: calls });
        observer(&Iterate { iteration: it, mode: Mode::Dykstra, matrix: &x, lambda_min: lmin });
    }

    let converged = lmin >= -cfg.epsilon && (!need_step || step <= cfg.dykstra_step_tol);
    let report = ProjectionReport {
        method: Method::Dykstra,
        iterations: it,
        proj_cp_calls: calls,
        trace,
        final_lambda_min: lmin,
        mixing_p: 0.0,
        converged,
        dual_gradient_norm: None,
    };
    Ok((x, lmin, report))
}
