// SPDX-License-Identifier: Apache-2.0

//! Exact Euclidean projection onto `𝒞𝒫𝒯𝒫` by quasi-Newton ascent on the Lagrange dual.
//!
//! For a Hermitian multiplier `ν` on the constraint `Tr_s Φ = 𝟙/d` the Lagrangian
//! `‖Φ - Φ₀‖² + ⟨ν, Tr_s Φ - 𝟙/d⟩` is minimised over the PSD cone by
//! `Φ_rel(ν) = P_CP(Φ₀ - ½ 𝟙 ⊗ ν)`. The dual function `q(ν)` is concave with gradient
//! `Tr_s Φ_rel(ν) - 𝟙/d`, Lipschitz with constant `d/2`.

use super::{
    add_identity_kron, choi_dim, positive_part, proj_tp_unchecked, Iterate, Method, Mode,
    ProjectionConfig, ProjectionReport, RawOutcome, TraceRow,
};
use crate::channel::{partial_trace_unchecked, Subsystem};
use crate::error::{QptError, Result};
use crate::linalg::{self, c, r, CMatrix};

const ARMIJO: f64 = 1e-4;
const CURVATURE: f64 = 0.9;
const MAX_BRACKET: usize = 25;
const MAX_ZOOM: usize = 40;

/// `P_CP(Φ₀ - ½ 𝟙 ⊗ ν)`.
pub fn relaxed_primal(phi0: &CMatrix, nu: &CMatrix) -> Result<CMatrix> {
    let d = choi_dim(phi0)?;
    if nu.nrows() != d || nu.ncols() != d {
        return Err(QptError::DimensionMismatch { expected: d, found: nu.nrows() });
    }
    Ok(positive_part(&linalg::eigh(&add_identity_kron(phi0, &(nu * r(-0.5)), d))?))
}

/// Dual value `q(ν)` and gradient `Tr_s Φ_rel(ν) - 𝟙/d`.
pub fn dual_objective(phi0: &CMatrix, nu: &CMatrix) -> Result<(f64, CMatrix)> {
    let d = choi_dim(phi0)?;
    let rel = relaxed_primal(phi0, nu)?;
    let (q, g) = value_and_gradient(phi0, nu, &rel, d);
    Ok((q, g))
}

fn value_and_gradient(phi0: &CMatrix, nu: &CMatrix, rel: &CMatrix, d: usize) -> (f64, CMatrix) {
    let g = partial_trace_unchecked(rel, d, Subsystem::System) - CMatrix::identity(d, d) * r(1.0 / d as f64);
    let q = linalg::frobenius_norm(&(rel - phi0)).powi(2) + linalg::inner(nu, &g);
    (q, g)
}

/// Orthonormal real coordinates of a Hermitian matrix: diagonal, then `√2 Re`, `√2 Im` above it.
fn to_coords(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        v.push(m[(i, i)].re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            v.push(s * m[(i, j)].re);
            v.push(s * m[(i, j)].im);
        }
    }
    v
}

fn from_coords(v: &[f64], d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = r(v[i]);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = c(s * v[k], s * v[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negated dual at a coordinate vector; minimised by BFGS.
struct Point {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    grad_norm: f64,
    rel: CMatrix,
}

struct Problem<'a> {
    phi0: &'a CMatrix,
    d: usize,
    calls: usize,
}

impl Problem<'_> {
    fn eval(&mut self, x: Vec<f64>) -> Result<Point> {
        let nu = from_coords(&x, self.d);
        let rel = positive_part(&linalg::eigh(&add_identity_kron(self.phi0, &(&nu * r(-0.5)), self.d))?);
        self.calls += 1;
        let (q, g) = value_and_gradient(self.phi0, &nu, &rel, self.d);
        let grad_norm = linalg::frobenius_norm(&g);
        let g: Vec<f64> = to_coords(&g).into_iter().map(|v| -v).collect();
        Ok(Point { x, f: -q, g, grad_norm, rel })
    }

    fn along(&mut self, from: &Point, p: &[f64], alpha: f64) -> Result<Point> {
        let x = from.x.iter().zip(p).map(|(a, b)| a + alpha * b).collect();
        self.eval(x)
    }

    /// Wolfe line search by bracketing and bisection. The sufficient-decrease test carries
    /// a relative round-off allowance so that it stays meaningful near the optimum.
    fn line_search(&mut self, start: &Point, p: &[f64]) -> Result<Option<Point>> {
        let d0 = dot(&start.g, p);
        let slack = 1e-12 * start.f.abs().max(1e-300);
        let armijo = |alpha: f64, f: f64| f <= start.f + ARMIJO * alpha * d0 + slack;
        let curvature = |dphi: f64| dphi.abs() <= -CURVATURE * d0;

        let (mut lo, mut f_lo) = (0.0, start.f);
        let mut alpha = 1.0;
        let mut hi = None;
        for i in 0..MAX_BRACKET {
            let pt = self.along(start, p, alpha)?;
            let dphi = dot(&pt.g, p);
            if !armijo(alpha, pt.f) || (i > 0 && pt.f >= f_lo) {
                hi = Some(alpha);
                break;
            }
            if curvature(dphi) {
                return Ok(Some(pt));
            }
            if dphi >= 0.0 {
                hi = Some(lo);
                lo = alpha;
                f_lo = pt.f;
                break;
            }
            lo = alpha;
            f_lo = pt.f;
            alpha *= 2.0;
        }
        let Some(mut hi) = hi else { return Ok(None) };
        let mut best: Option<Point> = None;
        for _ in 0..MAX_ZOOM {
            let alpha = 0.5 * (lo + hi);
            let pt = self.along(start, p, alpha)?;
            let dphi = dot(&pt.g, p);
            if !armijo(alpha, pt.f) || pt.f >= f_lo {
                hi = alpha;
            } else {
                if curvature(dphi) {
                    return Ok(Some(pt));
                }
                if dphi * (hi - lo) >= 0.0 {
                    hi = lo;
                }
                lo = alpha;
                f_lo = pt.f;
                best = Some(pt);
            }
            if (hi - lo).abs() < 1e-14 * lo.abs().max(1e-14) {
                break;
            }
        }
        // Accept an Armijo point that failed the curvature test rather than stalling.
        Ok(best)
    }
}

pub(super) fn run(
    phi0: &CMatrix,
    d: usize,
    cfg: &ProjectionConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<RawOutcome> {
    let n = d * d;
    let mut prob = Problem { phi0, d, calls: 0 };
    let mut cur = prob.eval(vec![0.0; n])?;
    let h0 = 2.0 / d as f64;
    let mut h = identity_scaled(n, h0);
    let mut fresh = true;

    let mut trace = Vec::new();
    let mut record = |it: usize, mode: Mode, pt: &Point, calls: usize, trace: &mut Vec<TraceRow>| -> Result<()> {
        let tp = proj_tp_unchecked(&pt.rel, d);
        let lmin = linalg::min_eigenvalue(&tp)?;
        trace.push(TraceRow { iteration: it, mode, lambda_min: lmin, cum_proj_cp_calls: calls });
        observer(&Iterate { iteration: it, mode, matrix: &tp, lambda_min: lmin });
        Ok(())
    };
    record(0, Mode::Init, &cur, prob.calls, &mut trace)?;

    let mut it = 0;
    while cur.grad_norm > cfg.dual_gradient_tol && it < cfg.dual_max_iterations {
        let mut p: Vec<f64> = matvec(&h, &cur.g).into_iter().map(|v| -v).collect();
        if dot(&p, &cur.g) >= 0.0 {
            h = identity_scaled(n, h0);
            fresh = true;
            p = cur.g.iter().map(|v| -h0 * v).collect();
        }
        let next = match prob.line_search(&cur, &p)? {
            Some(pt) => pt,
            None if !fresh => {
                h = identity_scaled(n, h0);
                fresh = true;
                continue;
            }
            None => break,
        };
        let s: Vec<f64> = next.x.iter().zip(&cur.x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 && sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let scale = sy / dot(&y, &y);
                h = identity_scaled(n, scale);
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        cur = next;
        it += 1;
        record(it, Mode::Dual, &cur, prob.calls, &mut trace)?;
    }

    let phi = proj_tp_unchecked(&cur.rel, d);
    let lmin = linalg::min_eigenvalue(&phi)?;
    let report = ProjectionReport {
        method: Method::Dual,
        iterations: it,
        proj_cp_calls: prob.calls,
        trace,
        final_lambda_min: lmin,
        mixing_p: 0.0,
        converged: cur.grad_norm <= cfg.dual_gradient_tol,
        dual_gradient_norm: Some(cur.grad_norm),
    };
    Ok((phi, lmin, report))
}

fn identity_scaled(n: usize, s: f64) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = s;
    }
    h
}

fn matvec(h: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&h[i * n..(i + 1) * n], v)).collect()
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
