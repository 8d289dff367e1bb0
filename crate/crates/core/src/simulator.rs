// SPDX-License-Identifier: Apache-2.0

//! Born probabilities and multinomial sampling for the four scenarios.
//!
//! A [`FrequencyTable`] is a list of outcome distributions, one per
//! (setting, input) pair:
//!
//! | scenario | distributions                | outcomes      |
//! |----------|------------------------------|---------------|
//! | 1        | `3^{2k}` settings            | `2^{2k}`      |
//! | 2        | `3^k` settings × `3^k 2^k` inputs | `2^k`    |
//! | 3        | 1                            | `d²(d²+1)`    |
//! | 4        | `d(d+1)` inputs              | `d(d+1)`      |
//!
//! Scenario 2 distribution `b · 3^k 2^k + a · 2^k + q` is measurement setting
//! `b` on input `(P^a_q)ᵀ`.
//!
//! Sampling draws every distribution from its own ChaCha8 stream, seeded by the
//! plan seed with the distribution index as stream number, so tables do not
//! depend on the thread count.

use log::debug;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChoiMatrix;
use crate::designs::{self, PauliSetting, Scenario};
use crate::error::{QptError, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli;
use crate::tolerances;

/// Shape of a scenario's table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub scenario: Scenario,
    pub dim: usize,
    pub settings: usize,
    pub inputs: usize,
    pub outcomes: usize,
}

impl Layout {
    pub fn new(scenario: Scenario, dim: usize) -> Result<Self> {
        designs::check_supported(scenario, dim)?;
        let (settings, inputs, outcomes) = match scenario {
            Scenario::PauliChoi => {
                let k = designs::qubits(dim)?;
                (PauliSetting::count(2 * k), 1, dim * dim)
            }
            Scenario::PauliIo => {
                let k = designs::qubits(dim)?;
                (PauliSetting::count(k), PauliSetting::count(k) * dim, dim)
            }
            Scenario::MubChoi => (1, 1, dim * dim * (dim * dim + 1)),
            Scenario::MubIo => (1, dim * (dim + 1), dim * (dim + 1)),
        };
        Ok(Self { scenario, dim, settings, inputs, outcomes })
    }

    pub fn distributions(&self) -> usize {
        self.settings * self.inputs
    }

    pub fn len(&self) -> usize {
        self.distributions() * self.outcomes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(setting, input)` of a distribution index.
    pub fn key(&self, distribution: usize) -> (usize, usize) {
        (distribution / self.inputs, distribution % self.inputs)
    }
}

/// How settings are allotted shots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Every distribution receives exactly `N / #distributions` shots.
    Fixed,
    /// Each shot picks its distribution uniformly at random.
    Random,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Fixed => "fixed",
            Scheme::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub scheme: Scheme,
    pub shots: u64,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(scheme: Scheme, shots: u64, seed: u64) -> Self {
        Self { scheme, shots, seed }
    }

    pub fn validate(&self, layout: &Layout) -> Result<()> {
        if self.shots == 0 {
            return Err(QptError::InvalidPlan("N must be positive".into()));
        }
        let n = layout.distributions() as u64;
        if self.scheme == Scheme::Fixed && !self.shots.is_multiple_of(n) {
            return Err(QptError::InvalidPlan(format!(
                "fixed scheme needs N divisible by {n}, got N = {}",
                self.shots
            )));
        }
        Ok(())
    }
}

/// Observed frequencies, `count / ν` with `ν = N / #distributions`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    layout: Layout,
    values: Vec<f64>,
    nu: f64,
    total_shots: u64,
    plan: Option<SamplingPlan>,
}

impl FrequencyTable {
    /// Wrap raw values laid out distribution-major.
    pub fn new(scenario: Scenario, dim: usize, values: Vec<f64>, total_shots: u64) -> Result<Self> {
        let layout = Layout::new(scenario, dim)?;
        if values.len() != layout.len() {
            return Err(QptError::DimensionMismatch {
                expected: layout.len(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(QptError::InvalidInput(format!("frequency {v} is negative or not finite")));
        }
        let nu = total_shots as f64 / layout.distributions() as f64;
        Ok(Self { layout, values, nu, total_shots, plan: None })
    }

    pub(crate) fn with_plan(mut self, plan: SamplingPlan) -> Self {
        self.plan = Some(plan);
        self
    }

    pub fn scenario(&self) -> Scenario {
        self.layout.scenario
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mean shots per distribution; 0 for exact tables.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn plan(&self) -> Option<&SamplingPlan> {
        self.plan.as_ref()
    }

    pub fn distribution(&self, i: usize) -> &[f64] {
        let m = self.layout.outcomes;
        &self.values[i * m..(i + 1) * m]
    }

    pub fn get(&self, setting: usize, input: usize, outcome: usize) -> f64 {
        let dist = setting * self.layout.inputs + input;
        self.values[dist * self.layout.outcomes + outcome]
    }

    /// Convex combination `α self + (1-α) other` of two tables of the same shape.
    pub fn mix(&self, alpha: f64, other: &FrequencyTable) -> Result<FrequencyTable> {
        if self.layout != other.layout {
            return Err(QptError::ScenarioMismatch {
                expected: self.scenario().number(),
                found: other.scenario().number(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        Ok(FrequencyTable {
            layout: self.layout,
            values,
            nu: self.nu,
            total_shots: self.total_shots,
            plan: None,
        })
    }

    pub fn expect_scenario(&self, scenario: Scenario) -> Result<()> {
        if self.scenario() != scenario {
            return Err(QptError::ScenarioMismatch {
                expected: scenario.number(),
                found: self.scenario().number(),
            });
        }
        Ok(())
    }
}

/// Scenario-1 probabilities of a `2^n x 2^n` state for every setting, setting-major.
fn pauli_state_probabilities(state: &CMatrix, n: usize) -> Result<Vec<f64>> {
    let coeffs = pauli::pauli_transform(state)?;
    let outcomes = 1usize << n;
    let scale = 1.0 / outcomes as f64;
    let settings = PauliSetting::count(n);
    let chunks: Vec<Vec<f64>> = (0..settings)
        .into_par_iter()
        .map(|s| {
            let setting = PauliSetting::from_index(s, n);
            let mut a: Vec<f64> = (0..outcomes)
                .map(|mask| coeffs[pauli::masked_pauli_index(setting.axes(), mask)].re)
                .collect();
            pauli::walsh_hadamard(&mut a);
            a.iter_mut().for_each(|x| *x *= scale);
            a
        })
        .collect();
    Ok(chunks.concat())
}

/// Unclamped Born probabilities of every distribution, in table order.
pub fn exact_probabilities(phi: &ChoiMatrix, scenario: Scenario) -> Result<Vec<f64>> {
    let d = phi.dim();
    let layout = Layout::new(scenario, d)?;
    let m = phi.matrix();
    match scenario {
        Scenario::PauliChoi => pauli_state_probabilities(m, 2 * designs::qubits(d)?),
        Scenario::PauliIo => {
            let k = designs::qubits(d)?;
            let joint = pauli_state_probabilities(m, 2 * k)?;
            let (s3, dk) = (PauliSetting::count(k), d);
            let mut out = vec![0.0; layout.len()];
            for b in 0..s3 {
                for a in 0..s3 {
                    let s = b * s3 + a;
                    for q in 0..dk {
                        let dist = b * layout.inputs + a * dk + q;
                        for p in 0..dk {
                            out[dist * dk + p] = d as f64 * joint[s * d * d + p * dk + q];
                        }
                    }
                }
            }
            Ok(out)
        }
        Scenario::MubChoi => {
            let fam = designs::mub_family(d * d)?;
            let v = fam.vectors();
            let mv = linalg::matmul(m, v);
            let w = 1.0 / (d * d + 1) as f64;
            Ok((0..v.ncols())
                .map(|j| v.column(j).dotc(&mv.column(j)).re * w)
                .collect())
        }
        Scenario::MubIo => {
            let fam = designs::mub_family(d)?;
            let n = fam.num_vectors();
            let v = fam.vectors();
            // Columns v_l ⊗ w_k for every (k, l), input-major.
            let prod = CMatrix::from_fn(d * d, n * n, |row, col| {
                let (k, l) = (col / n, col % n);
                v[(row / d, l)] * v[(row % d, k)]
            });
            let mp = linalg::matmul(m, &prod);
            let w = d as f64 / (d + 1) as f64;
            Ok((0..n * n)
                .map(|j| prod.column(j).dotc(&mp.column(j)).re * w)
                .collect())
        }
    }
}

fn check_physical(phi: &ChoiMatrix) -> Result<()> {
    if !phi.is_physical() {
        return Err(QptError::ConstraintViolation(
            "Born probabilities need a physical Choi matrix".into(),
        ));
    }
    Ok(())
}

/// Clamp negatives to zero and renormalise one distribution in place.
fn clean_distribution(p: &mut [f64], index: usize) -> Result<()> {
    for x in p.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tolerances::STRUCTURAL {
        return Err(QptError::ConstraintViolation(format!(
            "probabilities of distribution {index} sum to {s}"
        )));
    }
    if (s - 1.0).abs() > tolerances::RENORMALISATION_LOG {
        debug!("distribution {index}: renormalising by {s}");
    }
    p.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

/// All Born probabilities, clamped and normalised per distribution.
pub fn all_born_probabilities(phi: &ChoiMatrix, scenario: Scenario) -> Result<Vec<f64>> {
    check_physical(phi)?;
    let layout = Layout::new(scenario, phi.dim())?;
    let mut p = exact_probabilities(phi, scenario)?;
    for (i, chunk) in p.chunks_mut(layout.outcomes).enumerate() {
        clean_distribution(chunk, i)?;
    }
    Ok(p)
}

/// Born probabilities of one distribution.
pub fn born_probabilities(phi: &ChoiMatrix, scenario: Scenario, distribution: usize) -> Result<Vec<f64>> {
    let layout = Layout::new(scenario, phi.dim())?;
    if distribution >= layout.distributions() {
        return Err(QptError::InvalidInput(format!(
            "distribution {distribution} out of range 0..{}",
            layout.distributions()
        )));
    }
    let p = all_born_probabilities(phi, scenario)?;
    Ok(p[distribution * layout.outcomes..(distribution + 1) * layout.outcomes].to_vec())
}

/// Table holding the exact Born probabilities in place of frequencies.
pub fn exact_table(phi: &ChoiMatrix, scenario: Scenario) -> Result<FrequencyTable> {
    let p = all_born_probabilities(phi, scenario)?;
    FrequencyTable::new(scenario, phi.dim(), p, 0)
}

/// Multinomial draw by conditional binomials.
pub fn multinomial<R: rand::Rng + ?Sized>(n: u64, p: &[f64], rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; p.len()];
    let mut remaining = n;
    let mut mass = 1.0f64;
    for (i, &pi) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == p.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (pi / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        counts[i] = k;
        remaining -= k;
        mass -= pi;
    }
    counts
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample a frequency table from the exact probabilities `probs` (table order).
pub fn sample_from_probabilities(
    layout: &Layout,
    probs: &[f64],
    plan: &SamplingPlan,
) -> Result<FrequencyTable> {
    plan.validate(layout)?;
    let nd = layout.distributions();
    let m = layout.outcomes;
    let shots_per: Vec<u64> = match plan.scheme {
        Scheme::Fixed => vec![plan.shots / nd as u64; nd],
        Scheme::Random => {
            let uniform = vec![1.0 / nd as f64; nd];
            multinomial(plan.shots, &uniform, &mut stream_rng(plan.seed, 0))
        }
    };
    let nu = plan.shots as f64 / nd as f64;
    let values: Vec<f64> = (0..nd)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = stream_rng(plan.seed, i as u64 + 1);
            let p = &probs[i * m..(i + 1) * m];
            multinomial(shots_per[i], p, &mut rng)
                .into_iter()
                .map(move |c| c as f64 / nu)
        })
        .collect();
    Ok(FrequencyTable::new(layout.scenario, layout.dim, values, plan.shots)?.with_plan(*plan))
}

/// Simulate a scenario on a channel.
pub fn sample(phi: &ChoiMatrix, scenario: Scenario, plan: &SamplingPlan) -> Result<FrequencyTable> {
    let layout = Layout::new(scenario, phi.dim())?;
    plan.validate(&layout)?;
    let probs = all_born_probabilities(phi, scenario)?;
    sample_from_probabilities(&layout, &probs, plan)
}
