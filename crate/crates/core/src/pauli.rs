// SPDX-License-Identifier: Apache-2.0

//! Pauli-basis transforms on n-qubit operators.
//!
//! Qubit 0 is the most significant bit of a computational basis index. A Pauli
//! string is indexed in base 4 with the same significance, digit 0 = I,
//! 1 = X, 2 = Y, 3 = Z. The coefficient vector of an operator `M` holds
//! `c_P = Tr(P M)`, so that `M = 2^{-n} sum_P c_P P`.

use num_complex::Complex64;

use crate::error::{QptError, Result};
use crate::linalg::{c, CMatrix, I, ONE, ZERO};

/// Measurement axis of a single qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Base-4 Pauli digit of the matching Pauli matrix.
    pub fn pauli_digit(self) -> usize {
        self as usize + 1
    }

    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Axis> {
        match ch.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

/// Single-qubit Pauli matrix for digit 0..4.
pub fn sigma(digit: usize) -> CMatrix {
    let m = match digit {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => panic!("Pauli digit out of range: {digit}"),
    };
    CMatrix::from_row_slice(2, 2, &m)
}

/// Eigenvector of `sigma_axis` with eigenvalue `(-1)^outcome`.
pub fn eigenvector(axis: Axis, outcome: u8) -> [Complex64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = if outcome == 0 { 1.0 } else { -1.0 };
    match axis {
        Axis::Z if outcome == 0 => [ONE, ZERO],
        Axis::Z => [ZERO, ONE],
        Axis::X => [c(h, 0.0), c(s * h, 0.0)],
        Axis::Y => [c(h, 0.0), c(0.0, s * h)],
    }
}

/// Rank-one projector `|o, s><o, s|` of one qubit.
pub fn single_projector(axis: Axis, outcome: u8) -> CMatrix {
    let v = eigenvector(axis, outcome);
    crate::linalg::projector(&v)
}

/// Dense n-qubit Pauli string for a base-4 index.
pub fn pauli_string(index: usize, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for q in 0..n {
        let digit = (index >> (2 * (n - 1 - q))) & 3;
        out = out.kronecker(&sigma(digit));
    }
    out
}

/// Spread the bits of `x`: bit p moves to bit 2p.
#[inline]
fn spread(mut x: usize) -> usize {
    let mut out = 0usize;
    let mut p = 0;
    while x != 0 {
        out |= (x & 1) << (2 * p);
        x >>= 1;
        p += 1;
    }
    out
}

fn qubits_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QptError::InvalidDimension(format!(
            "{dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Pauli coefficients `c_P = Tr(P M)` of a `2^n x 2^n` matrix.
pub fn pauli_transform(m: &CMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(QptError::InvalidInput("Pauli transform of a non-square matrix".into()));
    }
    let n = qubits_of(m.nrows())?;
    let dim = m.nrows();
    let mut v = vec![ZERO; dim * dim];
    let spreads: Vec<usize> = (0..dim).map(spread).collect();
    for a in 0..dim {
        for b in 0..dim {
            v[(spreads[a] << 1) | spreads[b]] = m[(a, b)];
        }
    }
    for p in 0..n {
        let stride = 1usize << (2 * p);
        for base in 0..v.len() {
            if !(base / stride).is_multiple_of(4) {
                continue;
            }
            let (m00, m01, m10, m11) = (
                v[base],
                v[base + stride],
                v[base + 2 * stride],
                v[base + 3 * stride],
            );
            v[base] = m00 + m11;
            v[base + stride] = m01 + m10;
            v[base + 2 * stride] = I * (m01 - m10);
            v[base + 3 * stride] = m00 - m11;
        }
    }
    Ok(v)
}

/// Rebuild `M = 2^{-n} sum_P c_P P` from Pauli coefficients.
pub fn inverse_pauli_transform(coeffs: &[Complex64]) -> Result<CMatrix> {
    let len = coeffs.len();
    if len == 0 || !len.is_power_of_two() || !len.trailing_zeros().is_multiple_of(2) {
        return Err(QptError::InvalidInput(format!(
            "{len} Pauli coefficients is not a power of four"
        )));
    }
    let n = (len.trailing_zeros() / 2) as usize;
    let dim = 1usize << n;
    let mut v = coeffs.to_vec();
    for p in 0..n {
        let stride = 1usize << (2 * p);
        for base in 0..len {
            if !(base / stride).is_multiple_of(4) {
                continue;
            }
            let (ci, cx, cy, cz) = (
                v[base],
                v[base + stride],
                v[base + 2 * stride],
                v[base + 3 * stride],
            );
            v[base] = (ci + cz) * 0.5;
            v[base + stride] = (cx - I * cy) * 0.5;
            v[base + 2 * stride] = (cx + I * cy) * 0.5;
            v[base + 3 * stride] = (ci - cz) * 0.5;
        }
    }
    let spreads: Vec<usize> = (0..dim).map(spread).collect();
    Ok(CMatrix::from_fn(dim, dim, |a, b| v[(spreads[a] << 1) | spreads[b]]))
}

/// In-place unnormalised Walsh-Hadamard transform, `out[o] = sum_T (-1)^{|o & T|} v[T]`.
pub fn walsh_hadamard(v: &mut [f64]) {
    let n = v.len();
    assert!(n.is_power_of_two(), "WHT length must be a power of two");
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (v[j], v[j + h]);
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Pauli index of the string with `axes[q]` on the qubits of `mask` and I elsewhere.
///
/// `mask` uses the basis-index convention: qubit q is bit `n - 1 - q`.
pub fn masked_pauli_index(axes: &[Axis], mask: usize) -> usize {
    let n = axes.len();
    let mut idx = 0usize;
    for (q, axis) in axes.iter().enumerate() {
        let bit = n - 1 - q;
        if (mask >> bit) & 1 == 1 {
            idx |= axis.pauli_digit() << (2 * bit);
        }
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, random_hermitian, trace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transform_matches_dense_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_hermitian(8, &mut rng) + crate::linalg::random_ginibre(8, 8, &mut rng);
        let coeffs = pauli_transform(&m).unwrap();
        for (idx, &cp) in coeffs.iter().enumerate() {
            let expect = trace(&(pauli_string(idx, 3) * &m));
            assert!((cp - expect).norm() < 1e-12, "index {idx}");
        }
    }

    #[test]
    fn inverse_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = crate::linalg::random_ginibre(16, 16, &mut rng);
        let back = inverse_pauli_transform(&pauli_transform(&m).unwrap()).unwrap();
        assert!(frobenius_norm(&(back - &m)) < 1e-12);
    }

    #[test]
    fn eigenvectors_have_the_right_sign() {
        for axis in Axis::ALL {
            for o in 0..2u8 {
                let v = eigenvector(axis, o);
                let s = sigma(axis.pauli_digit());
                let sv = [s[(0, 0)] * v[0] + s[(0, 1)] * v[1], s[(1, 0)] * v[0] + s[(1, 1)] * v[1]];
                let sign = if o == 0 { 1.0 } else { -1.0 };
                assert!((sv[0] - v[0] * sign).norm() < 1e-15);
                assert!((sv[1] - v[1] * sign).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn wht_of_delta_is_flat() {
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        walsh_hadamard(&mut v);
        assert!(v.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn masked_index_places_digits() {
        let axes = [Axis::Z, Axis::X];
        assert_eq!(masked_pauli_index(&axes, 0b11), 3 * 4 + 1);
        assert_eq!(masked_pauli_index(&axes, 0b10), 3 * 4);
        assert_eq!(masked_pauli_index(&axes, 0b01), 1);
    }
}
