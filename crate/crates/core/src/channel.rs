// SPDX-License-Identifier: Apache-2.0

//! Channels as Kraus sets and Choi matrices.
//!
//! Tensor order is system ⊗ ancilla everywhere: a basis index of `C^d ⊗ C^d`
//! is `i_sys * d + i_anc`, and the channel acts on the first factor. The Choi
//! matrix of a Kraus set is
//!
//! ```text
//! Φ = (1/d) Σ_i vec(K_i) vec(K_i)*,    vec(K)[a d + q] = K[a, q]
//! ```
//!
//! so that `C(ρ) = d Tr_a(Φ (𝟙 ⊗ ρᵀ))`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QptError, Result};
use crate::linalg::{self, c, r, CMatrix, ZERO};
use crate::pauli;
use crate::tolerances;

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// First factor (channel output).
    System,
    /// Second factor.
    Ancilla,
}

/// Norm used by [`distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Frobenius,
    Trace,
    Operator,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Trace, Metric::Frobenius, Metric::Operator];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Frobenius => "frobenius",
            Metric::Trace => "trace",
            Metric::Operator => "operator",
        }
    }
}

/// A positive operator of trace one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(QptError::InvalidDimension(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !linalg::is_hermitian(&matrix, tolerances::HERMITIAN) {
            return Err(QptError::ConstraintViolation("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > tolerances::TRACE * 10.0 {
            return Err(QptError::ConstraintViolation(format!(
                "density matrix has trace {tr}"
            )));
        }
        let lmin = linalg::min_eigenvalue(&matrix)?;
        if lmin < tolerances::PSD {
            return Err(QptError::ConstraintViolation(format!(
                "density matrix has eigenvalue {lmin}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Pure state `|v><v|` of a unit vector.
    pub fn pure(v: &[num_complex::Complex64]) -> Result<Self> {
        Self::new(linalg::projector(v))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        linalg::inner(&self.matrix, &self.matrix)
    }
}

/// Kraus representation of a trace-preserving channel on `C^d`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let dim = operators
            .first()
            .map(|k| k.nrows())
            .ok_or_else(|| QptError::InvalidInput("empty Kraus set".into()))?;
        if dim < 2 {
            return Err(QptError::InvalidDimension(format!("d = {dim} is below 2")));
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for k in &operators {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(QptError::DimensionMismatch {
                    expected: dim,
                    found: k.nrows().max(k.ncols()),
                });
            }
            sum += k.adjoint() * k;
        }
        let defect = linalg::frobenius_norm(&(sum - CMatrix::identity(dim, dim)));
        if defect > tolerances::STRUCTURAL {
            return Err(QptError::ConstraintViolation(format!(
                "Kraus operators are not trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(Self { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// `Σ_i K_i ρ K_i*`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.operators {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Dimension of the span of the vectorised operators.
    pub fn kraus_rank(&self) -> usize {
        let m = self.operators.len();
        let gram = CMatrix::from_fn(m, m, |i, j| {
            self.operators[i]
                .iter()
                .zip(self.operators[j].iter())
                .map(|(a, b)| a.conj() * b)
                .sum()
        });
        let scale = linalg::eigvalsh(&gram)
            .map(|v| v.last().copied().unwrap_or(0.0))
            .unwrap_or(0.0)
            .max(1.0);
        linalg::eigvalsh(&gram)
            .map(|v| v.iter().filter(|&&x| x > tolerances::RANK * scale).count())
            .unwrap_or(0)
    }
}

/// Choi matrix of a channel on `C^d`, a `d² x d²` Hermitian matrix of trace one.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    /// Wrap a matrix, checking shape, Hermiticity and unit trace.
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        check_square_dim(&matrix, dim)?;
        if !linalg::is_hermitian(&matrix, tolerances::HERMITIAN) {
            return Err(QptError::ConstraintViolation(format!(
                "Choi matrix is not Hermitian (defect {:.3e})",
                linalg::hermiticity_defect(&matrix)
            )));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > tolerances::STRUCTURAL {
            return Err(QptError::ConstraintViolation(format!("Choi matrix has trace {tr}")));
        }
        Ok(Self { dim, matrix })
    }

    /// Wrap a matrix produced by this crate without re-checking it.
    pub(crate) fn from_trusted(dim: usize, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), dim * dim);
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::min_eigenvalue(&self.matrix)
    }

    /// `‖Tr_s(Φ) - 𝟙/d‖_F`.
    pub fn tp_defect(&self) -> f64 {
        let d = self.dim;
        let ts = partial_trace_unchecked(&self.matrix, d, Subsystem::System);
        linalg::frobenius_norm(&(ts - CMatrix::identity(d, d) * r(1.0 / d as f64)))
    }

    /// PSD to `tolerances::PSD` and TP to `tolerances::STRUCTURAL`.
    pub fn is_physical(&self) -> bool {
        self.tp_defect() <= tolerances::STRUCTURAL
            && self.min_eigenvalue().map(|l| l >= tolerances::PSD).unwrap_or(false)
    }

    /// Numerical rank: eigenvalues above `tolerances::RANK`.
    pub fn rank(&self) -> Result<usize> {
        Ok(linalg::eigvalsh(&self.matrix)?
            .iter()
            .filter(|&&x| x > tolerances::RANK)
            .count())
    }
}

fn check_square_dim(m: &CMatrix, d: usize) -> Result<()> {
    if d < 2 {
        return Err(QptError::InvalidDimension(format!("d = {d} is below 2")));
    }
    if m.nrows() != d * d || m.ncols() != d * d {
        return Err(QptError::DimensionMismatch {
            expected: d * d,
            found: if m.nrows() != d * d { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

/// `Ω = |ω><ω|` with `|ω> = d^{-1/2} Σ_q |q>⊗|q>`.
pub fn maximally_entangled_state(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(QptError::InvalidDimension(format!("d = {d} is below 2")));
    }
    let s = 1.0 / d as f64;
    let m = CMatrix::from_fn(d * d, d * d, |i, j| {
        if i % (d + 1) == 0 && j % (d + 1) == 0 {
            r(s)
        } else {
            ZERO
        }
    });
    Ok(DensityMatrix { matrix: m })
}

pub fn choi_from_kraus(kraus: &KrausSet) -> ChoiMatrix {
    let d = kraus.dim;
    let m = kraus.operators.len();
    let vecs = CMatrix::from_fn(d * d, m, |row, i| kraus.operators[i][(row / d, row % d)]);
    let mut phi = linalg::matmul(&vecs, &vecs.adjoint()) * r(1.0 / d as f64);
    phi = linalg::hermitian_part(&phi);
    ChoiMatrix::from_trusted(d, phi)
}

/// `C(ρ) = d Tr_a(Φ (𝟙 ⊗ ρᵀ))`.
pub fn apply_via_choi(phi: &ChoiMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = phi.dim;
    if rho.dim() != d {
        return Err(QptError::DimensionMismatch { expected: d, found: rho.dim() });
    }
    let rt = rho.matrix.transpose();
    let m = &phi.matrix;
    let mut out = CMatrix::zeros(d, d);
    // Entry (a, a') = d Σ_{q, q'} Φ[(a,q),(a',q')] ρᵀ[q', q].
    for a in 0..d {
        for ap in 0..d {
            let mut acc = ZERO;
            for q in 0..d {
                for qp in 0..d {
                    acc += m[(a * d + q, ap * d + qp)] * rt[(qp, q)];
                }
            }
            out[(a, ap)] = acc * d as f64;
        }
    }
    Ok(DensityMatrix { matrix: linalg::hermitian_part(&out) })
}

/// Partial trace of a `d² x d²` matrix over one factor.
pub fn partial_trace(m: &CMatrix, d: usize, which: Subsystem) -> Result<CMatrix> {
    if d == 0 || !m.is_square() || m.nrows() != d * d {
        return Err(QptError::DimensionMismatch {
            expected: d * d,
            found: m.nrows(),
        });
    }
    Ok(partial_trace_unchecked(m, d, which))
}

pub(crate) fn partial_trace_unchecked(m: &CMatrix, d: usize, which: Subsystem) -> CMatrix {
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = ZERO;
            for t in 0..d {
                acc += match which {
                    Subsystem::System => m[(t * d + i, t * d + j)],
                    Subsystem::Ancilla => m[(i * d + t, j * d + t)],
                };
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Distance between two Hermitian matrices of equal size.
pub fn distance(a: &CMatrix, b: &CMatrix, metric: Metric) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(QptError::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let diff = linalg::hermitian_part(&(a - b));
    Ok(match metric {
        Metric::Frobenius => linalg::frobenius_norm(&diff),
        Metric::Trace => linalg::eigvalsh(&diff)?.iter().map(|x| x.abs()).sum(),
        Metric::Operator => linalg::eigvalsh(&diff)?
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs())),
    })
}

/// All three distances from one eigendecomposition, in `Metric::ALL` order.
pub fn distances(a: &CMatrix, b: &CMatrix) -> Result<[f64; 3]> {
    let diff = linalg::hermitian_part(&(a - b));
    let ev = linalg::eigvalsh(&diff)?;
    Ok([
        ev.iter().map(|x| x.abs()).sum(),
        linalg::frobenius_norm(&diff),
        ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs())),
    ])
}

/// State fidelity `(Tr √(√A B √A))²` between two PSD matrices.
pub fn fidelity(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let sa = linalg::psd_sqrt(a)?;
    let inner = linalg::hermitian_part(&(&sa * b * &sa));
    let ev = linalg::eigvalsh(&inner)?;
    // Null eigenvalues carry round-off of order 1e-16 that the square root would inflate.
    let floor = ev.last().copied().unwrap_or(0.0).abs() * 1e-13;
    let t: f64 = ev.iter().filter(|&&x| x > floor).map(|x| x.sqrt()).sum();
    Ok(t * t)
}

/// A unitary used as a ground truth or as the base of a mixed-unitary channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitarySpec {
    Identity,
    Qft,
    /// Haar-random unitary drawn from the seed.
    Haar { seed: u64 },
    /// Explicit matrix, rows of `[re, im]` pairs.
    Explicit { rows: Vec<Vec<[f64; 2]>> },
}

impl UnitarySpec {
    pub fn matrix(&self, d: usize) -> Result<CMatrix> {
        let u = match self {
            UnitarySpec::Identity => CMatrix::identity(d, d),
            UnitarySpec::Qft => qft_unitary(d),
            UnitarySpec::Haar { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                linalg::random_unitary(d, &mut rng)
            }
            UnitarySpec::Explicit { rows } => {
                if rows.len() != d || rows.iter().any(|row| row.len() != d) {
                    return Err(QptError::DimensionMismatch {
                        expected: d,
                        found: rows.len(),
                    });
                }
                CMatrix::from_fn(d, d, |i, j| c(rows[i][j][0], rows[i][j][1]))
            }
        };
        let defect = linalg::frobenius_norm(&(u.adjoint() * &u - CMatrix::identity(d, d)));
        if defect > tolerances::STRUCTURAL {
            return Err(QptError::ConstraintViolation(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(u)
    }

    pub fn label(&self) -> String {
        match self {
            UnitarySpec::Identity => "identity".into(),
            UnitarySpec::Qft => "qft".into(),
            UnitarySpec::Haar { seed } => format!("haar{seed}"),
            UnitarySpec::Explicit { .. } => "explicit".into(),
        }
    }
}

/// Kind of ground-truth channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    Identity,
    Unitary { unitary: UnitarySpec },
    /// QFT followed by a z measurement of qubit 0 with probability `measure_prob`.
    NoisyQft { measure_prob: f64 },
    /// `ρ ↦ (1/r) Σ_{i<r} W S_i ρ S_i* W*` over the first `rank` Pauli strings.
    MixedUnitary { rank: usize, base: UnitarySpec },
    /// `ρ ↦ (1-p) ρ + p 𝟙/d`, written with Weyl operators so any d works.
    Depolarizing { p: f64 },
}

/// A channel kind together with its dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(flatten)]
    pub kind: ChannelKind,
    pub dim: usize,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, dim: usize) -> Self {
        Self { kind, dim }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d < 2 {
            return Err(QptError::InvalidDimension(format!("d = {d} is below 2")));
        }
        match &self.kind {
            ChannelKind::NoisyQft { measure_prob } => {
                if !(0.0..=1.0).contains(measure_prob) {
                    return Err(QptError::InvalidInput(format!(
                        "measure_prob {measure_prob} outside [0, 1]"
                    )));
                }
                if !d.is_power_of_two() {
                    return Err(QptError::InvalidDimension(format!(
                        "noisy_qft needs a qubit register, d = {d}"
                    )));
                }
            }
            ChannelKind::MixedUnitary { rank, .. } => {
                if *rank == 0 || *rank > d * d {
                    return Err(QptError::InvalidRank { rank: *rank, max: d * d });
                }
                if !d.is_power_of_two() {
                    return Err(QptError::InvalidDimension(format!(
                        "mixed_unitary uses Pauli strings and needs d a power of two, d = {d}"
                    )));
                }
            }
            ChannelKind::Depolarizing { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(QptError::InvalidInput(format!("p {p} outside [0, 1]")));
                }
            }
            ChannelKind::Identity | ChannelKind::Unitary { .. } => {}
        }
        Ok(())
    }

    /// Kraus rank the construction is documented to have.
    pub fn declared_rank(&self) -> usize {
        match &self.kind {
            ChannelKind::Identity | ChannelKind::Unitary { .. } => 1,
            ChannelKind::NoisyQft { measure_prob } => {
                if *measure_prob == 0.0 {
                    1
                } else {
                    2
                }
            }
            ChannelKind::MixedUnitary { rank, .. } => *rank,
            ChannelKind::Depolarizing { p } => {
                if *p == 0.0 {
                    1
                } else {
                    self.dim * self.dim
                }
            }
        }
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match &self.kind {
            ChannelKind::Identity => "identity".into(),
            ChannelKind::Unitary { unitary } => format!("unitary-{}", unitary.label()),
            ChannelKind::NoisyQft { measure_prob } => format!("noisy_qft-{measure_prob}"),
            ChannelKind::MixedUnitary { rank, base } => {
                format!("mixed_unitary-r{rank}-{}", base.label())
            }
            ChannelKind::Depolarizing { p } => format!("depolarizing-{p}"),
        }
    }
}

/// Discrete Fourier transform matrix `F[j, l] = ω^{jl}/√d`.
pub fn qft_unitary(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |j, l| {
        let angle = 2.0 * PI * ((j * l) % d) as f64 / d as f64;
        c(s * angle.cos(), s * angle.sin())
    })
}

/// Weyl operator `X^a Z^b` on `C^d`.
pub fn weyl(d: usize, a: usize, b: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |row, col| {
        if row == (col + a) % d {
            let angle = 2.0 * PI * ((b * col) % d) as f64 / d as f64;
            c(angle.cos(), angle.sin())
        } else {
            ZERO
        }
    })
}

pub fn make_channel(spec: &ChannelSpec) -> Result<KrausSet> {
    spec.validate()?;
    let d = spec.dim;
    let ops = match &spec.kind {
        ChannelKind::Identity => vec![CMatrix::identity(d, d)],
        ChannelKind::Unitary { unitary } => vec![unitary.matrix(d)?],
        ChannelKind::NoisyQft { measure_prob: q } => {
            let u = qft_unitary(d);
            let half = d / 2;
            let p0 = CMatrix::from_fn(d, d, |i, j| if i == j && i < half { r(1.0) } else { ZERO });
            let p1 = CMatrix::identity(d, d) - &p0;
            vec![
                &u * r((1.0 - q).sqrt()),
                &p0 * &u * r(q.sqrt()),
                &p1 * &u * r(q.sqrt()),
            ]
        }
        ChannelKind::MixedUnitary { rank, base } => {
            let w = base.matrix(d)?;
            let n = d.trailing_zeros() as usize;
            let s = 1.0 / (*rank as f64).sqrt();
            (0..*rank)
                .map(|i| &w * pauli::pauli_string(i, n) * r(s))
                .collect()
        }
        ChannelKind::Depolarizing { p } => {
            let mut ops = Vec::with_capacity(d * d);
            let d2 = (d * d) as f64;
            for a in 0..d {
                for b in 0..d {
                    let w = if a == 0 && b == 0 {
                        (1.0 - p + p / d2).sqrt()
                    } else {
                        (p / d2).sqrt()
                    };
                    ops.push(weyl(d, a, b) * r(w));
                }
            }
            ops
        }
    };
    KrausSet::new(ops)
}

/// Choi matrix of a channel spec.
pub fn choi_of(spec: &ChannelSpec) -> Result<ChoiMatrix> {
    Ok(choi_from_kraus(&make_channel(spec)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, random_density, random_unitary};
    use proptest::prelude::*;

    fn assert_close(a: &CMatrix, b: &CMatrix, tol: f64) {
        let e = frobenius_norm(&(a - b));
        assert!(e <= tol, "distance {e:.3e} above {tol:.1e}");
    }

    #[test]
    fn omega_for_a_qubit() {
        let om = maximally_entangled_state(2).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            expect[(i, j)] = r(0.5);
        }
        assert_close(om.matrix(), &expect, 0.0);
        let ts = partial_trace(om.matrix(), 2, Subsystem::System).unwrap();
        assert_close(&ts, &(CMatrix::identity(2, 2) * r(0.5)), 1e-15);
    }

    #[test]
    fn omega_is_pure() {
        let om = maximally_entangled_state(3).unwrap();
        assert!((om.purity() - 1.0).abs() < 1e-14);
        assert!(maximally_entangled_state(1).is_err());
    }

    #[test]
    fn identity_kraus_gives_omega() {
        let k = KrausSet::new(vec![CMatrix::identity(3, 3)]).unwrap();
        let phi = choi_from_kraus(&k);
        assert_close(phi.matrix(), maximally_entangled_state(3).unwrap().matrix(), 1e-15);
    }

    #[test]
    fn pauli_kraus_gives_maximally_mixed() {
        let ops = (0..4).map(|i| pauli::sigma(i) * r(0.5)).collect();
        let phi = choi_from_kraus(&KrausSet::new(ops).unwrap());
        assert_close(phi.matrix(), &(CMatrix::identity(4, 4) * r(0.25)), 1e-15);
    }

    #[test]
    fn non_tp_kraus_is_rejected() {
        let err = KrausSet::new(vec![CMatrix::identity(2, 2) * r(0.9)]).unwrap_err();
        assert!(matches!(err, QptError::ConstraintViolation(_)));
    }

    #[test]
    fn noisy_qft_has_rank_two() {
        let spec = ChannelSpec::new(ChannelKind::NoisyQft { measure_prob: 0.25 }, 2);
        let k = make_channel(&spec).unwrap();
        assert_eq!(k.operators().len(), 3);
        assert_eq!(k.kraus_rank(), 2);
        assert_eq!(choi_from_kraus(&k).rank().unwrap(), 2);
    }

    #[test]
    fn noiseless_qft_matches_unitary() {
        let a = choi_of(&ChannelSpec::new(ChannelKind::NoisyQft { measure_prob: 0.0 }, 4)).unwrap();
        let b = choi_of(&ChannelSpec::new(
            ChannelKind::Unitary { unitary: UnitarySpec::Qft },
            4,
        ))
        .unwrap();
        assert_close(a.matrix(), b.matrix(), 1e-14);
    }

    #[test]
    fn mixed_unitary_spectrum_is_flat() {
        let spec = ChannelSpec::new(
            ChannelKind::MixedUnitary { rank: 4, base: UnitarySpec::Identity },
            4,
        );
        let ev = linalg::eigvalsh(choi_of(&spec).unwrap().matrix()).unwrap();
        for (i, &x) in ev.iter().rev().enumerate() {
            let expect = if i < 4 { 0.25 } else { 0.0 };
            assert!((x - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_mixed_unitary_is_pure() {
        let spec = ChannelSpec::new(
            ChannelKind::MixedUnitary { rank: 1, base: UnitarySpec::Haar { seed: 9 } },
            4,
        );
        let phi = choi_of(&spec).unwrap();
        assert_eq!(phi.rank().unwrap(), 1);
        assert!((linalg::inner(phi.matrix(), phi.matrix()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_rank_is_rejected() {
        let spec = ChannelSpec::new(
            ChannelKind::MixedUnitary { rank: 17, base: UnitarySpec::Identity },
            4,
        );
        assert!(matches!(make_channel(&spec), Err(QptError::InvalidRank { rank: 17, max: 16 })));
    }

    #[test]
    fn depolarizing_works_for_odd_dimension() {
        let phi = choi_of(&ChannelSpec::new(ChannelKind::Depolarizing { p: 1.0 }, 3)).unwrap();
        assert_close(phi.matrix(), &(CMatrix::identity(9, 9) * r(1.0 / 9.0)), 1e-14);
    }

    #[test]
    fn partial_trace_example() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            r(0.75),
            r(0.25),
            r(-0.25),
            r(0.25),
        ]));
        let ts = partial_trace(&m, 2, Subsystem::System).unwrap();
        assert_close(&ts, &(CMatrix::identity(2, 2) * r(0.5)), 1e-15);
    }

    #[test]
    fn partial_trace_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = linalg::random_ginibre(3, 3, &mut rng);
        let b = linalg::random_ginibre(3, 3, &mut rng);
        let ab = a.kronecker(&b);
        assert_close(&partial_trace(&ab, 3, Subsystem::System).unwrap(), &(&b * linalg::trace(&a)), 1e-12);
        assert_close(&partial_trace(&ab, 3, Subsystem::Ancilla).unwrap(), &(&a * linalg::trace(&b)), 1e-12);
        assert!(partial_trace(&ab, 2, Subsystem::System).is_err());
    }

    #[test]
    fn diagonal_distances() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![r(1.0), r(0.0)]));
        let b = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![r(0.0), r(1.0)]));
        assert!((distance(&a, &b, Metric::Frobenius).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((distance(&a, &b, Metric::Trace).unwrap() - 2.0).abs() < 1e-15);
        assert!((distance(&a, &b, Metric::Operator).unwrap() - 1.0).abs() < 1e-15);
        for m in Metric::ALL {
            assert_eq!(distance(&a, &a, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn orthogonal_pure_chois_are_at_trace_distance_two() {
        let id = choi_of(&ChannelSpec::new(ChannelKind::Identity, 2)).unwrap();
        let x = KrausSet::new(vec![pauli::sigma(1)]).unwrap();
        let phix = choi_from_kraus(&x);
        assert!((distance(id.matrix(), phix.matrix(), Metric::Trace).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn channel_action_on_omega_and_depolarizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = DensityMatrix::new(random_density(3, 2, &mut rng)).unwrap();
        let id = choi_of(&ChannelSpec::new(ChannelKind::Identity, 3)).unwrap();
        assert_close(apply_via_choi(&id, &rho).unwrap().matrix(), rho.matrix(), 1e-14);
        let dep = choi_of(&ChannelSpec::new(ChannelKind::Depolarizing { p: 1.0 }, 3)).unwrap();
        assert_close(
            apply_via_choi(&dep, &rho).unwrap().matrix(),
            &(CMatrix::identity(3, 3) * r(1.0 / 3.0)),
            1e-14,
        );
    }

    #[test]
    fn fidelity_of_identical_states_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = random_density(4, 2, &mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
    }

    fn random_kraus(d: usize, count: usize, rng: &mut ChaCha8Rng) -> KrausSet {
        // Rows of an isometry C^d -> C^{d·count}.
        let u = random_unitary(d * count, rng);
        let ops = (0..count)
            .map(|i| CMatrix::from_fn(d, d, |a, b| u[(i * d + a, b)]))
            .collect();
        KrausSet::new(ops).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn choi_action_matches_kraus_action(seed in any::<u64>(), dsel in 0usize..2, count in 1usize..5) {
            let d = [2, 4][dsel];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_kraus(d, count, &mut rng);
            let rho = DensityMatrix::new(random_density(d, 1 + seed as usize % d, &mut rng)).unwrap();
            let phi = choi_from_kraus(&k);
            let via_choi = apply_via_choi(&phi, &rho).unwrap();
            prop_assert!(frobenius_norm(&(via_choi.matrix() - k.apply(rho.matrix()))) <= 1e-10);
        }

        #[test]
        fn constructed_channels_are_physical(dsel in 0usize..4, rank_seed in any::<u64>(), q in 0.0f64..=1.0) {
            let d = [2usize, 4, 8, 16][dsel];
            let rank = 1 + (rank_seed as usize % (d * d).min(32));
            let specs = [
                ChannelSpec::new(ChannelKind::NoisyQft { measure_prob: q }, d),
                ChannelSpec::new(ChannelKind::MixedUnitary { rank, base: UnitarySpec::Haar { seed: rank_seed } }, d),
            ];
            for spec in specs {
                let phi = choi_of(&spec).unwrap();
                prop_assert!((linalg::trace(phi.matrix()).re - 1.0).abs() <= 1e-12);
                prop_assert!(phi.tp_defect() <= 1e-10);
                prop_assert!(phi.min_eigenvalue().unwrap() >= -1e-10);
                prop_assert_eq!(phi.rank().unwrap(), spec.declared_rank());
            }
        }

        #[test]
        fn norm_ordering(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = linalg::random_hermitian(n, &mut rng);
            let b = linalg::random_hermitian(n, &mut rng);
            let [t, f, o] = distances(&a, &b).unwrap();
            let slack = 1e-12 * (1.0 + t);
            prop_assert!(o <= f + slack);
            prop_assert!(f <= t + slack);
            prop_assert!(t <= n as f64 * o + slack);
        }
    }
}
