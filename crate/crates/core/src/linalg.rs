// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra helpers.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. The Hermitian
//! eigendecomposition and the rank-k reconstruction that follows it are the
//! dominant cost of every projection, so both live here behind [`eigh`] and
//! [`weighted_outer_sum`] and run on faer.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{QptError, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all<'a, I>(factors: I) -> CMatrix
where
    I: IntoIterator<Item = &'a CMatrix>,
{
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise modulus of `m - m*`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= tol
}

/// Returns `(m + m*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * r(0.5)
}

/// Real Frobenius inner product `Re Tr(a* b)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Outer product `|u><v|`.
pub fn outer(u: &[Complex64], v: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
}

pub fn projector(v: &[Complex64]) -> CMatrix {
    outer(v, v)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in nondecreasing order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Rebuild `sum_i w_i |v_i><v_i|` in this eigenbasis.
    pub fn rebuild(&self, weights: &[f64]) -> CMatrix {
        weighted_outer_sum(&self.vectors, weights)
    }
}

fn to_faer(m: &CMatrix) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Hermitian eigendecomposition. Only the lower triangle of `m` is read.
pub fn eigh(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(QptError::InvalidInput(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let evd = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| QptError::InvalidInput(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..s.nrows()).map(|i| s[i].re).collect();
    Ok(HermitianEigen {
        values,
        vectors: from_faer(evd.U()),
    })
}

/// Eigenvalues only, nondecreasing.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    to_faer(m)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| QptError::InvalidInput(format!("eigendecomposition failed: {e:?}")))
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(eigvalsh(m)?.first().copied().unwrap_or(0.0))
}

/// `sum_i w_i |v_i><v_i|` over the columns of `vectors`; zero weights are skipped.
pub fn weighted_outer_sum(vectors: &CMatrix, weights: &[f64]) -> CMatrix {
    let n = vectors.nrows();
    let active: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] != 0.0).collect();
    if active.is_empty() {
        return CMatrix::zeros(n, n);
    }
    let left = Mat::<Complex64>::from_fn(n, active.len(), |i, j| {
        vectors[(i, active[j])] * weights[active[j]]
    });
    let right = Mat::<Complex64>::from_fn(n, active.len(), |i, j| vectors[(i, active[j])]);
    let prod = &left * right.adjoint();
    let mut out = from_faer(prod.as_ref());
    // Symmetrise away the rounding asymmetry of the product.
    for i in 0..n {
        out[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let z = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    out
}

/// Dense product through faer, for the large matrices where it matters.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let prod = to_faer(a) * to_faer(b);
    from_faer(prod.as_ref())
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are clipped.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let evd = eigh(m)?;
    let w: Vec<f64> = evd.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    Ok(evd.rebuild(&w))
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE scaling).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(n, n, rng);
    hermitian_part(&g)
}

pub fn random_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of R removed.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(n, n, rng);
    let qr = g.qr();
    let (mut q, rr) = (qr.q(), qr.r());
    for j in 0..n {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random density matrix of the given rank (trace one).
pub fn random_density<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(n, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = trace(&m).re;
    hermitian_part(&(m / r(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigh_reconstructs_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(12, &mut rng);
        let evd = eigh(&h).unwrap();
        assert!(evd.values.windows(2).all(|w| w[0] <= w[1]));
        let back = evd.rebuild(&evd.values);
        assert!(frobenius_norm(&(back - &h)) < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(8, &mut rng);
        let err = frobenius_norm(&(u.adjoint() * &u - identity(8)));
        assert!(err < 1e-12);
    }

    #[test]
    fn inner_matches_trace_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(5, &mut rng);
        let b = random_hermitian(5, &mut rng);
        let via_trace = trace(&(a.adjoint() * &b)).re;
        assert!((inner(&a, &b) - via_trace).abs() < 1e-12);
    }

    #[test]
    fn matmul_agrees_with_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_ginibre(6, 4, &mut rng);
        let b = random_ginibre(4, 7, &mut rng);
        assert!(frobenius_norm(&(matmul(&a, &b) - &a * &b)) < 1e-12);
    }
}
