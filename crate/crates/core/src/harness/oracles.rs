// SPDX-License-Identifier: Apache-2.0

//! Reference projections computed without eigendecompositions.
//!
//! Used to cross-check the closed-form projections:
//!
//! * `𝒯𝒫`: generic affine projection `x - Aᵀ(AAᵀ)⁻¹(Ax - b)` with the partial-trace
//!   constraints written out as a dense real matrix.
//! * PSD cone: `(X + |X|)/2` with `|X| = X·sign(X)` from the Newton sign iteration.
//! * Trace-one PSD: bisection on the shift `μ` in `(X - μ𝟙)₊`.

use nalgebra::{DMatrix, DVector};

use crate::error::{QptError, Result};
use crate::linalg::{self, c, r, CMatrix};

/// Real coordinates `(Re, Im)` of every entry, row-major.
fn to_real(m: &CMatrix) -> DVector<f64> {
    let n = m.nrows();
    DVector::from_fn(2 * n * n, |k, _| {
        let z = m[(k / 2 / n, (k / 2) % n)];
        if k % 2 == 0 {
            z.re
        } else {
            z.im
        }
    })
}

fn from_real(v: &DVector<f64>, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        c(v[k], v[k + 1])
    })
}

/// Affine projection onto `Tr_s X = 𝟙/d` by a dense normal-equations solve.
pub fn oracle_proj_tp(x: &CMatrix, d: usize) -> Result<CMatrix> {
    let n = d * d;
    if x.nrows() != n || x.ncols() != n {
        return Err(QptError::DimensionMismatch { expected: n, found: x.nrows() });
    }
    // One real row per real and imaginary part of each entry (i, j) of Tr_s X.
    let rows = 2 * d * d;
    let mut a = DMatrix::<f64>::zeros(rows, 2 * n * n);
    let mut b = DVector::<f64>::zeros(rows);
    for i in 0..d {
        for j in 0..d {
            let row = 2 * (i * d + j);
            for s in 0..d {
                let entry = (s * d + i) * n + (s * d + j);
                a[(row, 2 * entry)] = 1.0;
                a[(row + 1, 2 * entry + 1)] = 1.0;
            }
            if i == j {
                b[row] = 1.0 / d as f64;
            }
        }
    }
    let v = to_real(x);
    let aat = &a * a.transpose();
    let resid = &a * &v - b;
    let lambda = aat
        .lu()
        .solve(&resid)
        .ok_or_else(|| QptError::NotConverged("singular constraint Gram matrix".into()))?;
    let y = v - a.transpose() * lambda;
    Ok(from_real(&y, n))
}

/// Matrix sign by the scaled Newton iteration `S ← (γS + (γS)⁻¹)/2`.
pub fn matrix_sign(x: &CMatrix) -> Result<CMatrix> {
    let n = x.nrows();
    let mut s = x.clone();
    let mut prev = f64::INFINITY;
    for _ in 0..200 {
        let inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| QptError::NotConverged("singular iterate in sign iteration".into()))?;
        // Determinant scaling speeds up the early iterations.
        let gamma = (linalg::frobenius_norm(&inv) / linalg::frobenius_norm(&s)).sqrt();
        let next = (&s * r(gamma) + inv * r(1.0 / gamma)) * r(0.5);
        let step = linalg::frobenius_norm(&(&next - &s));
        s = next;
        let scale = (n as f64).sqrt();
        // Stop at the round-off floor: tiny steps that no longer shrink.
        if step <= 1e-14 * scale || (step <= 1e-9 * scale && step >= prev) {
            return Ok(linalg::hermitian_part(&s));
        }
        prev = step;
    }
    Err(QptError::NotConverged("sign iteration did not converge".into()))
}

/// PSD projection `(X + X·sign(X))/2`.
pub fn oracle_proj_cp(x: &CMatrix) -> Result<CMatrix> {
    let s = matrix_sign(x)?;
    Ok(linalg::hermitian_part(&((x + x * s) * r(0.5))))
}

/// Projection onto trace-one PSD matrices: `(X - μ𝟙)₊` with `μ` found by bisection.
pub fn oracle_proj_cp1(x: &CMatrix) -> Result<CMatrix> {
    let n = x.nrows();
    let id = CMatrix::identity(n, n);
    let bound = linalg::frobenius_norm(x) + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    let mass = |mu: f64| -> Result<(f64, CMatrix)> {
        let p = oracle_proj_cp(&(x - &id * r(mu)))?;
        Ok((linalg::trace(&p).re, p))
    };
    let mut best = mass(lo)?.1;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (t, p) = mass(mid)?;
        if t > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        best = p;
        if hi - lo < 1e-15 * bound {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sign_of_diagonal() {
        let x = CMatrix::from_diagonal(&DVector::from_vec(vec![r(2.0), r(-0.5), r(0.1)]));
        let s = matrix_sign(&x).unwrap();
        let expect = CMatrix::from_diagonal(&DVector::from_vec(vec![r(1.0), r(-1.0), r(1.0)]));
        assert!(frobenius_norm(&(s - expect)) < 1e-12);
    }

    #[test]
    fn oracles_return_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_hermitian(4, &mut rng);
        let p = oracle_proj_cp(&x).unwrap();
        assert!(linalg::min_eigenvalue(&p).unwrap() > -1e-12);
        let q = oracle_proj_cp1(&x).unwrap();
        assert!((linalg::trace(&q).re - 1.0).abs() < 1e-10);
        let t = oracle_proj_tp(&x, 2).unwrap();
        let ts = crate::channel::partial_trace(&t, 2, crate::channel::Subsystem::System).unwrap();
        assert!(frobenius_norm(&(ts - CMatrix::identity(2, 2) * r(0.5))) < 1e-12);
    }
}
