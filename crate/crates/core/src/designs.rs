// SPDX-License-Identifier: Apache-2.0

//! Measurement resources for the four scenarios.
//!
//! * Pauli settings: one axis per qubit, enumerated in base 3 with qubit 0 most
//!   significant and digits x = 0, y = 1, z = 2. Outcome bitstrings use the same
//!   significance; outcome bit 1 selects the `-1` eigenvector.
//! * Mutually unbiased bases: for an odd prime `p` the quadratic-phase family
//!   `v_{j,t}(l) = ω^{j l² + t l}/√p` together with the computational basis; for
//!   `D = 2^m` the Galois-field family
//!   `v_{λ,a}(x) = i^{Q_λ(x)} (-1)^{tr(a x)}/√D`, where `Q_λ` is the lift to Z₄ of
//!   the form `x ↦ tr(λ x²)` written in the polynomial basis. The computational
//!   basis always comes first.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::DensityMatrix;
use crate::error::{QptError, Result};
use crate::gf2m::Gf2m;
use crate::linalg::{self, c, r, CMatrix};
use crate::pauli::{self, Axis};

/// Seed of the fixed isotropy probe set.
pub const ISOTROPY_PROBE_SEED: u64 = 0x2D_E516;

/// Number of random Hermitian probes in the isotropy check.
pub const ISOTROPY_RANDOM_PROBES: usize = 20;

/// One of the four measurement scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// Pauli measurements on the Choi state.
    PauliChoi = 1,
    /// Pauli product inputs and Pauli measurements.
    PauliIo = 2,
    /// MUB measurement of the Choi state.
    MubChoi = 3,
    /// MUB inputs and MUB measurements.
    MubIo = 4,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::PauliChoi,
        Scenario::PauliIo,
        Scenario::MubChoi,
        Scenario::MubIo,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn uses_pauli(self) -> bool {
        matches!(self, Scenario::PauliChoi | Scenario::PauliIo)
    }
}

impl TryFrom<u8> for Scenario {
    type Error = QptError;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Scenario::PauliChoi),
            2 => Ok(Scenario::PauliIo),
            3 => Ok(Scenario::MubChoi),
            4 => Ok(Scenario::MubIo),
            _ => Err(QptError::InvalidInput(format!("scenario {v} is not one of 1..=4"))),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.number()
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Measurement axes, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliSetting {
    axes: Vec<Axis>,
}

impl PauliSetting {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    /// Setting number `index` among the `3^n` settings of n qubits.
    pub fn from_index(mut index: usize, n: usize) -> Self {
        let mut axes = vec![Axis::X; n];
        for q in (0..n).rev() {
            axes[q] = Axis::from_index(index % 3);
            index /= 3;
        }
        Self { axes }
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| {
                Axis::from_symbol(ch)
                    .ok_or_else(|| QptError::Parse(format!("'{ch}' is not a Pauli axis")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn index(&self) -> usize {
        self.axes.iter().fold(0, |acc, a| acc * 3 + a.index())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn count(n: usize) -> usize {
        3usize.pow(n as u32)
    }
}

impl std::fmt::Display for PauliSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for a in &self.axes {
            write!(f, "{}", a.symbol())?;
        }
        Ok(())
    }
}

/// Outcome bitstring of `n` qubits packed into an integer, qubit 0 most significant.
pub fn outcome_bits(outcome: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((outcome >> (n - 1 - q)) & 1) as u8).collect()
}

/// `⊗_q |o_q, s_q><o_q, s_q|`.
pub fn pauli_projector(setting: &PauliSetting, outcome: &[u8]) -> Result<CMatrix> {
    if outcome.len() != setting.len() {
        return Err(QptError::DimensionMismatch {
            expected: setting.len(),
            found: outcome.len(),
        });
    }
    let mut out = CMatrix::identity(1, 1);
    for (axis, &o) in setting.axes.iter().zip(outcome) {
        out = out.kronecker(&pauli::single_projector(*axis, o));
    }
    Ok(out)
}

/// Product state vector `⊗_q |o_q, s_q>`.
pub fn pauli_vector(setting: &PauliSetting, outcome: &[u8]) -> Vec<Complex64> {
    let mut v = vec![c(1.0, 0.0)];
    for (axis, &o) in setting.axes.iter().zip(outcome) {
        let e = pauli::eigenvector(*axis, o);
        v = v.iter().flat_map(|&x| [x * e[0], x * e[1]]).collect();
    }
    v
}

/// A complete set of `D + 1` mutually unbiased bases of `C^D`.
#[derive(Debug, Clone)]
pub struct MubFamily {
    dim: usize,
    /// Columns are the vectors, basis `b` occupying columns `b D .. (b+1) D`.
    vectors: CMatrix,
}

impl MubFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_bases(&self) -> usize {
        self.vectors.ncols() / self.dim
    }

    pub fn num_vectors(&self) -> usize {
        self.vectors.ncols()
    }

    /// All vectors as the columns of one `D x (#bases · D)` matrix.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, basis: usize, element: usize) -> Vec<Complex64> {
        self.vectors.column(basis * self.dim + element).iter().copied().collect()
    }

    pub fn projector(&self, index: usize) -> CMatrix {
        let v: Vec<Complex64> = self.vectors.column(index).iter().copied().collect();
        linalg::projector(&v)
    }

    /// The same family with one basis removed, for negative tests of the design checks.
    pub fn without_basis(&self, basis: usize) -> MubFamily {
        let d = self.dim;
        let keep: Vec<usize> = (0..self.vectors.ncols())
            .filter(|i| i / d != basis)
            .collect();
        let vectors = CMatrix::from_fn(d, keep.len(), |i, j| self.vectors[(i, keep[j])]);
        MubFamily { dim: d, vectors }
    }

    /// Largest deviation from orthonormality within a basis.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for b in 0..self.num_bases() {
            let block = self.vectors.columns(b * d, d);
            let gram = block.adjoint() * block;
            worst = worst.max(linalg::frobenius_norm(&(gram - CMatrix::identity(d, d))));
        }
        worst
    }

    /// Largest `| |<v|w>|² - 1/D |` over pairs from different bases.
    pub fn unbiasedness_defect(&self) -> f64 {
        let d = self.dim;
        let gram = self.vectors.adjoint() * &self.vectors;
        let target = 1.0 / d as f64;
        let mut worst = 0.0f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                if i / d != j / d {
                    worst = worst.max((gram[(i, j)].norm_sqr() - target).abs());
                }
            }
        }
        worst
    }
}

/// Whether `n` is an odd prime.
pub fn is_odd_prime(n: usize) -> bool {
    if n < 3 || n.is_multiple_of(2) {
        return false;
    }
    let mut f = 3;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

/// Complete MUB family of `C^D` for an odd prime or a power of two up to 2^8.
pub fn mub_family(dim: usize) -> Result<MubFamily> {
    if is_odd_prime(dim) {
        Ok(prime_family(dim))
    } else if dim >= 2 && dim.is_power_of_two() && dim <= 256 {
        binary_family(dim)
    } else {
        Err(QptError::NotImplemented(format!(
            "no MUB family for dimension {dim}; supported: odd primes and powers of two up to 256"
        )))
    }
}

fn prime_family(p: usize) -> MubFamily {
    let s = 1.0 / (p as f64).sqrt();
    let mut vectors = CMatrix::zeros(p, p * (p + 1));
    for l in 0..p {
        vectors[(l, l)] = r(1.0);
    }
    for j in 0..p {
        for t in 0..p {
            let col = p + j * p + t;
            for l in 0..p {
                let e = (j * l % p * l + t * l) % p;
                let angle = 2.0 * PI * e as f64 / p as f64;
                vectors[(l, col)] = c(s * angle.cos(), s * angle.sin());
            }
        }
    }
    MubFamily { dim: p, vectors }
}

fn binary_family(dim: usize) -> Result<MubFamily> {
    let m = dim.trailing_zeros();
    let field = Gf2m::new(m)?;
    let s = 1.0 / (dim as f64).sqrt();
    let mu = m as usize;
    let mut vectors = CMatrix::zeros(dim, dim * (dim + 1));
    for x in 0..dim {
        vectors[(x, x)] = r(1.0);
    }
    let basis: Vec<u32> = (0..mu).map(|i| 1u32 << i).collect();
    for lambda in 0..dim as u32 {
        // Z4 lift: Q(x) = Σ_i x_i q_i + 2 Σ_{i<j} x_i x_j B_ij, B_ij = tr(λ e_i e_j).
        let bmat: Vec<Vec<u32>> = (0..mu)
            .map(|i| {
                (0..mu)
                    .map(|j| field.trace(field.mul(lambda, field.mul(basis[i], basis[j]))))
                    .collect()
            })
            .collect();
        let phase_q: Vec<u32> = (0..dim as u32)
            .map(|x| {
                let bits: Vec<u32> = (0..mu).map(|i| (x >> i) & 1).collect();
                let mut q = 0u32;
                for i in 0..mu {
                    q += bits[i] * bmat[i][i];
                    for j in (i + 1)..mu {
                        q += 2 * bits[i] * bits[j] * bmat[i][j];
                    }
                }
                q % 4
            })
            .collect();
        for a in 0..dim as u32 {
            let col = dim + lambda as usize * dim + a as usize;
            for x in 0..dim as u32 {
                let sign = if field.trace(field.mul(a, x)) == 1 { 2 } else { 0 };
                let k = (phase_q[x as usize] + sign) % 4;
                vectors[(x as usize, col)] = match k {
                    0 => c(s, 0.0),
                    1 => c(0.0, s),
                    2 => c(-s, 0.0),
                    _ => c(0.0, -s),
                };
            }
        }
    }
    Ok(MubFamily { dim, vectors })
}

/// `Σ_v |v><v| <v|A|v>` over every vector of the family.
pub fn isotropy_lhs(family: &MubFamily, a: &CMatrix) -> CMatrix {
    let v = family.vectors();
    let av = a * v;
    let weights: Vec<f64> = (0..v.ncols())
        .map(|j| v.column(j).dotc(&av.column(j)).re)
        .collect();
    linalg::weighted_outer_sum(v, &weights)
}

/// The deterministic probe set: 𝟙, |0><0| and seeded random Hermitian matrices.
pub fn isotropy_probes(dim: usize) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(ISOTROPY_PROBE_SEED ^ dim as u64);
    let mut probes = vec![CMatrix::identity(dim, dim)];
    let mut e0 = CMatrix::zeros(dim, dim);
    e0[(0, 0)] = r(1.0);
    probes.push(e0);
    for _ in 0..ISOTROPY_RANDOM_PROBES {
        probes.push(linalg::random_hermitian(dim, &mut rng));
    }
    probes
}

/// `max_A ‖Σ_v |v><v| <v|A|v> - A - Tr(A) 𝟙‖_∞` over the probe set.
pub fn near_isotropy_defect(family: &MubFamily) -> f64 {
    isotropy_probes(family.dim())
        .iter()
        .map(|a| {
            let rhs = a + CMatrix::identity(family.dim(), family.dim()) * linalg::trace(a);
            let diff = isotropy_lhs(family, a) - rhs;
            linalg::eigvalsh(&linalg::hermitian_part(&diff))
                .map(|ev| ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

/// A labelled set of positive operators.
#[derive(Debug, Clone)]
pub struct Povm {
    pub elements: Vec<CMatrix>,
    pub labels: Vec<String>,
}

impl Povm {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `‖Σ E - 𝟙‖_F`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.elements.first().map(|e| e.nrows()).unwrap_or(0);
        let mut sum = CMatrix::zeros(n, n);
        for e in &self.elements {
            sum += e;
        }
        linalg::frobenius_norm(&(sum - CMatrix::identity(n, n)))
    }

    /// Smallest eigenvalue over all elements.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.elements
            .iter()
            .map(linalg::min_eigenvalue)
            .try_fold(f64::INFINITY, |acc, x| Ok(acc.min(x?)))
    }
}

/// Number of qubits of a power-of-two dimension.
pub fn qubits(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(QptError::InvalidDimension(format!(
            "d = {d} is not a power of two, Pauli scenarios need qubits"
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

fn mub_povm(dim: usize) -> Result<Povm> {
    let fam = mub_family(dim)?;
    let w = 1.0 / (dim + 1) as f64;
    let elements = (0..fam.num_vectors())
        .map(|i| fam.projector(i) * r(w))
        .collect();
    let labels = (0..fam.num_vectors())
        .map(|i| format!("b{}e{}", i / dim, i % dim))
        .collect();
    Ok(Povm { elements, labels })
}

fn pauli_povm(n: usize, setting: usize) -> Result<Povm> {
    if setting >= PauliSetting::count(n) {
        return Err(QptError::InvalidInput(format!(
            "setting {setting} out of range for {n} qubits"
        )));
    }
    let s = PauliSetting::from_index(setting, n);
    let mut elements = Vec::with_capacity(1 << n);
    let mut labels = Vec::with_capacity(1 << n);
    for o in 0..(1usize << n) {
        let bits = outcome_bits(o, n);
        elements.push(pauli_projector(&s, &bits)?);
        labels.push(format!("{s}:{}", bits.iter().map(|b| b.to_string()).collect::<String>()));
    }
    Ok(Povm { elements, labels })
}

/// Measurement of a scenario on a channel of dimension `d`.
///
/// Scenarios 1 and 2 need a setting index (over `3^{2k}` and `3^k` settings);
/// scenarios 3 and 4 ignore it.
pub fn scenario_povm(scenario: Scenario, d: usize, setting: Option<usize>) -> Result<Povm> {
    match scenario {
        Scenario::PauliChoi => pauli_povm(2 * qubits(d)?, setting.unwrap_or(0)),
        Scenario::PauliIo => pauli_povm(qubits(d)?, setting.unwrap_or(0)),
        Scenario::MubChoi => mub_povm(d * d),
        Scenario::MubIo => mub_povm(d),
    }
}

/// Input states of scenarios 2 and 4, in table order.
///
/// Scenario 2 input `a 2^k + q` is `(P^a_q)ᵀ`; scenario 4 input `i` is the
/// transpose of the i-th MUB projector.
pub fn scenario_inputs(scenario: Scenario, d: usize) -> Result<Vec<DensityMatrix>> {
    match scenario {
        Scenario::PauliIo => {
            let k = qubits(d)?;
            let mut out = Vec::new();
            for a in 0..PauliSetting::count(k) {
                let s = PauliSetting::from_index(a, k);
                for q in 0..(1usize << k) {
                    let p = pauli_projector(&s, &outcome_bits(q, k))?;
                    out.push(DensityMatrix::new(p.transpose())?);
                }
            }
            Ok(out)
        }
        Scenario::MubIo => {
            let fam = mub_family(d)?;
            (0..fam.num_vectors())
                .map(|i| DensityMatrix::new(fam.projector(i).transpose()))
                .collect()
        }
        _ => Err(QptError::InvalidInput(format!(
            "scenario {scenario} has no input states"
        ))),
    }
}

/// Check that `(scenario, d)` is constructible.
pub fn check_supported(scenario: Scenario, d: usize) -> Result<()> {
    match scenario {
        Scenario::PauliChoi | Scenario::PauliIo => qubits(d).map(|_| ()),
        Scenario::MubChoi => {
            if d.is_power_of_two() && (2..=16).contains(&d) {
                Ok(())
            } else {
                Err(QptError::NotImplemented(format!(
                    "scenario 3 needs MUBs of dimension {}, available for powers of two up to 256",
                    d * d
                )))
            }
        }
        Scenario::MubIo => {
            if is_odd_prime(d) || (d.is_power_of_two() && (2..=256).contains(&d)) {
                Ok(())
            } else {
                Err(QptError::NotImplemented(format!(
                    "scenario 4 needs MUBs of dimension {d}: odd primes and powers of two only"
                )))
            }
        }
    }
}
