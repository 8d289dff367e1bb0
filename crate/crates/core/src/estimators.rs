// SPDX-License-Identifier: Apache-2.0

//! Closed-form least-squares Choi estimators.
//!
//! The Pauli scenarios are evaluated in the Pauli basis. Writing the
//! single-qubit factor as `3P^s_o - 𝟙 = (𝟙 + 3(-1)^o σ_s)/2`, the estimator
//!
//! ```text
//! Φ̂ = 3^{-n} Σ_s Σ_o f^s_o ⊗_q (3 P^{s_q}_{o_q} - 𝟙)
//! ```
//!
//! has Pauli coefficients `b_P = 3^{-n} Σ_{s ⊇ P} 3^{|T|} WHT(f^s)[T]`, where `T`
//! is the support of `P` and the sum runs over settings that agree with `P` on
//! `T`. One Walsh-Hadamard transform per setting replaces the `2^n` Kronecker
//! products of the direct formula.

use serde::{Deserialize, Serialize};

use crate::designs::{self, PauliSetting, Scenario};
use crate::error::{QptError, Result};
use crate::linalg::{self, r, CMatrix, ZERO};
use crate::pauli;
use crate::simulator::FrequencyTable;

/// Least-squares estimate of a Choi matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LsEstimate {
    pub scenario: Scenario,
    pub dim: usize,
    pub matrix: CMatrix,
    pub meta: EstimateMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateMeta {
    pub total_shots: u64,
    pub nu: f64,
    pub seed: Option<u64>,
}

impl LsEstimate {
    fn from_table(table: &FrequencyTable, matrix: CMatrix) -> Self {
        Self {
            scenario: table.scenario(),
            dim: table.dim(),
            matrix: linalg::hermitian_part(&matrix),
            meta: EstimateMeta {
                total_shots: table.total_shots(),
                nu: table.nu(),
                seed: table.plan().map(|p| p.seed),
            },
        }
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }
}

/// Scenario-1 estimator on `n` qubits from setting-major frequencies.
fn pauli_ls(values: &[f64], n: usize) -> Result<CMatrix> {
    let outcomes = 1usize << n;
    let settings = PauliSetting::count(n);
    if values.len() != settings * outcomes {
        return Err(QptError::DimensionMismatch {
            expected: settings * outcomes,
            found: values.len(),
        });
    }
    let pow3: Vec<f64> = (0..=n).map(|w| 3f64.powi(w as i32)).collect();
    let mut coeffs = vec![ZERO; 1usize << (2 * n)];
    let mut buf = vec![0.0; outcomes];
    for s in 0..settings {
        let setting = PauliSetting::from_index(s, n);
        buf.copy_from_slice(&values[s * outcomes..(s + 1) * outcomes]);
        pauli::walsh_hadamard(&mut buf);
        for (mask, &w) in buf.iter().enumerate() {
            let idx = pauli::masked_pauli_index(setting.axes(), mask);
            coeffs[idx].re += pow3[mask.count_ones() as usize] * w;
        }
    }
    let norm = 1.0 / pow3[n];
    coeffs.iter_mut().for_each(|c| *c *= norm);
    pauli::inverse_pauli_transform(&coeffs)
}

/// `3^{-2k} Σ_s Σ_o f^s_o ⊗ (3|o,s><o,s| - 𝟙)`.
pub fn ls_scenario1(f: &FrequencyTable) -> Result<LsEstimate> {
    f.expect_scenario(Scenario::PauliChoi)?;
    let n = 2 * designs::qubits(f.dim())?;
    Ok(LsEstimate::from_table(f, pauli_ls(f.values(), n)?))
}

/// `(3^{2k} d)^{-1} Σ f^{ab}_{qp} (⊗ 3P^b_p - 𝟙) ⊗ (⊗ 3P^a_q - 𝟙)`.
///
/// The measurement label `(b, p)` sits on the system factor and the input label
/// `(a, q)` on the ancilla factor.
pub fn ls_scenario2(f: &FrequencyTable) -> Result<LsEstimate> {
    f.expect_scenario(Scenario::PauliIo)?;
    let d = f.dim();
    let k = designs::qubits(d)?;
    let s3 = PauliSetting::count(k);
    let layout = *f.layout();
    let scale = 1.0 / d as f64;
    let mut joint = vec![0.0; s3 * s3 * d * d];
    for b in 0..s3 {
        for a in 0..s3 {
            let s = b * s3 + a;
            for q in 0..d {
                let dist = b * layout.inputs + a * d + q;
                let row = f.distribution(dist);
                for p in 0..d {
                    joint[s * d * d + p * d + q] = row[p] * scale;
                }
            }
        }
    }
    Ok(LsEstimate::from_table(f, pauli_ls(&joint, 2 * k)?))
}

/// `(d²+1) Σ_i f_i |v_i><v_i| - 𝟙`.
pub fn ls_scenario3(f: &FrequencyTable) -> Result<LsEstimate> {
    f.expect_scenario(Scenario::MubChoi)?;
    let d = f.dim();
    let dd = d * d;
    let fam = designs::mub_family(dd)?;
    let weights: Vec<f64> = f.values().iter().map(|x| x * (dd + 1) as f64).collect();
    let m = linalg::weighted_outer_sum(fam.vectors(), &weights) - CMatrix::identity(dd, dd);
    Ok(LsEstimate::from_table(f, m))
}

/// `(d+1)/d Σ f P_l⊗Q_k - (1/d) Σ f (P_l⊗𝟙 + 𝟙⊗Q_k) + 𝟙⊗𝟙`.
pub fn ls_scenario4(f: &FrequencyTable) -> Result<LsEstimate> {
    f.expect_scenario(Scenario::MubIo)?;
    let d = f.dim();
    let fam = designs::mub_family(d)?;
    let n = fam.num_vectors();
    let id = CMatrix::identity(d, d);
    let mut joint = CMatrix::zeros(d * d, d * d);
    let mut meas = CMatrix::zeros(d, d);
    let mut inputs = CMatrix::zeros(d, d);
    for kk in 0..n {
        let row = f.distribution(kk);
        let a = linalg::weighted_outer_sum(fam.vectors(), row);
        let q = fam.projector(kk);
        joint += a.kronecker(&q);
        meas += a;
        inputs += q * r(row.iter().sum::<f64>());
    }
    let df = d as f64;
    let m = joint * r((df + 1.0) / df) - (meas.kronecker(&id) + id.kronecker(&inputs)) * r(1.0 / df)
        + CMatrix::identity(d * d, d * d);
    Ok(LsEstimate::from_table(f, m))
}

/// Dispatch on the table's scenario.
pub fn ls_estimate(f: &FrequencyTable) -> Result<LsEstimate> {
    match f.scenario() {
        Scenario::PauliChoi => ls_scenario1(f),
        Scenario::PauliIo => ls_scenario2(f),
        Scenario::MubChoi => ls_scenario3(f),
        Scenario::MubIo => ls_scenario4(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_of, maximally_entangled_state, ChannelKind, ChannelSpec, ChoiMatrix, UnitarySpec};
    use crate::designs::outcome_bits;
    use crate::linalg::frobenius_norm;
    use crate::simulator::{exact_table, sample, Layout, SamplingPlan, Scheme};
    use proptest::prelude::*;

    fn spec(kind: ChannelKind, d: usize) -> ChoiMatrix {
        choi_of(&ChannelSpec::new(kind, d)).unwrap()
    }

    /// Direct Kronecker-sum evaluation of the scenario-1 formula.
    fn kronecker_scenario1(f: &FrequencyTable) -> CMatrix {
        let n = 2 * designs::qubits(f.dim()).unwrap();
        let dim = 1 << n;
        let mut out = CMatrix::zeros(dim, dim);
        for s in 0..PauliSetting::count(n) {
            let setting = PauliSetting::from_index(s, n);
            for o in 0..dim {
                let bits = outcome_bits(o, n);
                let mut term = CMatrix::identity(1, 1);
                for (axis, &b) in setting.axes().iter().zip(&bits) {
                    let m = pauli::single_projector(*axis, b) * r(3.0) - CMatrix::identity(2, 2);
                    term = term.kronecker(&m);
                }
                out += term * r(f.get(s, 0, o));
            }
        }
        out / r(3f64.powi(n as i32))
    }

    #[test]
    fn fast_scenario1_matches_kronecker_sum() {
        let phi = spec(ChannelKind::NoisyQft { measure_prob: 0.25 }, 2);
        let t = sample(&phi, Scenario::PauliChoi, &SamplingPlan::new(Scheme::Random, 5000, 3)).unwrap();
        let fast = ls_scenario1(&t).unwrap().matrix;
        assert!(frobenius_norm(&(fast - kronecker_scenario1(&t))) < 1e-12);
    }

    #[test]
    fn scenario1_exact_omega() {
        let om = maximally_entangled_state(2).unwrap();
        let phi = ChoiMatrix::new(2, om.matrix().clone()).unwrap();
        let est = ls_scenario1(&exact_table(&phi, Scenario::PauliChoi).unwrap()).unwrap();
        assert!(frobenius_norm(&(est.matrix - om.matrix())) < 1e-10);
    }

    #[test]
    fn scenario1_uniform_table_gives_maximally_mixed() {
        let t = FrequencyTable::new(Scenario::PauliChoi, 2, vec![0.25; 36], 0).unwrap();
        let est = ls_scenario1(&t).unwrap();
        assert!(frobenius_norm(&(est.matrix - CMatrix::identity(4, 4) * r(0.25))) < 1e-14);
    }

    #[test]
    fn scenario2_exact_identity_and_noisy_qft() {
        let id = spec(ChannelKind::Identity, 2);
        let est = ls_scenario2(&exact_table(&id, Scenario::PauliIo).unwrap()).unwrap();
        assert!(frobenius_norm(&(est.matrix - id.matrix())) < 1e-10);
        let nq = spec(ChannelKind::NoisyQft { measure_prob: 0.25 }, 4);
        let est = ls_scenario2(&exact_table(&nq, Scenario::PauliIo).unwrap()).unwrap();
        assert!(frobenius_norm(&(est.matrix - nq.matrix())) < 1e-10);
    }

    #[test]
    fn scenario2_degenerate_table_is_structurally_sound() {
        let layout = Layout::new(Scenario::PauliIo, 2).unwrap();
        let z = PauliSetting::parse("z").unwrap().index();
        let mut values = vec![0.0; layout.len()];
        for dist in 0..layout.distributions() {
            let (b, input) = layout.key(dist);
            let (a, q) = (input / 2, input % 2);
            // All mass on p = q; uniform elsewhere.
            if a == z && b == z {
                values[dist * 2 + q] = 1.0;
            } else {
                values[dist * 2] = 0.5;
                values[dist * 2 + 1] = 0.5;
            }
        }
        let t = FrequencyTable::new(Scenario::PauliIo, 2, values, 0).unwrap();
        let est = ls_scenario2(&t).unwrap();
        assert!(linalg::is_hermitian(&est.matrix, 1e-12));
        assert!((est.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scenario3_cases() {
        let m = 20;
        let uniform = FrequencyTable::new(Scenario::MubChoi, 2, vec![1.0 / m as f64; m], 0).unwrap();
        let est = ls_scenario3(&uniform).unwrap();
        assert!(frobenius_norm(&(est.matrix - CMatrix::identity(4, 4) * r(0.25))) < 1e-13);

        let id = spec(ChannelKind::Identity, 2);
        let est = ls_scenario3(&exact_table(&id, Scenario::MubChoi).unwrap()).unwrap();
        assert!(frobenius_norm(&(est.matrix - id.matrix())) < 1e-10);

        let mut single = vec![0.0; m];
        single[7] = 1.0;
        let est = ls_scenario3(&FrequencyTable::new(Scenario::MubChoi, 2, single, 0).unwrap()).unwrap();
        let fam = designs::mub_family(4).unwrap();
        let expect = fam.projector(7) * r(5.0) - CMatrix::identity(4, 4);
        assert!(frobenius_norm(&(&est.matrix - expect)) < 1e-13);
        assert!((est.trace() - 1.0).abs() < 1e-13);
        assert!((linalg::min_eigenvalue(&est.matrix).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn scenario4_exact_identity_and_depolarizer() {
        let id = spec(ChannelKind::Identity, 2);
        let est = ls_scenario4(&exact_table(&id, Scenario::MubIo).unwrap()).unwrap();
        assert!(frobenius_norm(&(est.matrix - id.matrix())) < 1e-10);
        let dep = spec(ChannelKind::Depolarizing { p: 1.0 }, 3);
        let est = ls_scenario4(&exact_table(&dep, Scenario::MubIo).unwrap()).unwrap();
        assert!(frobenius_norm(&(est.matrix - CMatrix::identity(9, 9) * r(1.0 / 9.0))) < 1e-10);
    }

    #[test]
    fn scenario_mismatch_is_reported() {
        let id = spec(ChannelKind::Identity, 2);
        let t = exact_table(&id, Scenario::MubChoi).unwrap();
        assert!(matches!(
            ls_scenario1(&t),
            Err(QptError::ScenarioMismatch { expected: 1, found: 3 })
        ));
    }

    #[test]
    fn identifiability_over_channels() {
        let kinds = |_d: usize| {
            vec![
                ChannelKind::Identity,
                ChannelKind::Unitary { unitary: UnitarySpec::Haar { seed: 21 } },
                ChannelKind::NoisyQft { measure_prob: 0.25 },
                ChannelKind::MixedUnitary { rank: 3, base: UnitarySpec::Qft },
            ]
        };
        for scenario in [Scenario::PauliChoi, Scenario::PauliIo, Scenario::MubChoi] {
            for d in [2, 4] {
                for kind in kinds(d) {
                    let phi = spec(kind, d);
                    let est = ls_estimate(&exact_table(&phi, scenario).unwrap()).unwrap();
                    assert!(frobenius_norm(&(est.matrix - phi.matrix())) < 1e-9, "{scenario} d={d}");
                }
            }
        }
        for d in [2, 3] {
            let mut ks = vec![
                ChannelKind::Identity,
                ChannelKind::Unitary { unitary: UnitarySpec::Haar { seed: 5 } },
                ChannelKind::Depolarizing { p: 0.3 },
            ];
            if d == 2 {
                ks.push(ChannelKind::NoisyQft { measure_prob: 0.25 });
                ks.push(ChannelKind::MixedUnitary { rank: 2, base: UnitarySpec::Identity });
            }
            for kind in ks {
                let phi = spec(kind, d);
                let est = ls_estimate(&exact_table(&phi, Scenario::MubIo).unwrap()).unwrap();
                assert!(frobenius_norm(&(est.matrix - phi.matrix())) < 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn estimators_are_affine(seed in any::<u64>(), scen in 0usize..4, alpha in 0.0f64..=1.0) {
            let scenario = Scenario::ALL[scen];
            let phi = spec(ChannelKind::Unitary { unitary: UnitarySpec::Haar { seed } }, 2);
            let psi = spec(ChannelKind::NoisyQft { measure_prob: 0.5 }, 2);
            let plan = |s| SamplingPlan::new(Scheme::Random, 2000, s);
            let f1 = sample(&phi, scenario, &plan(seed)).unwrap();
            let f2 = sample(&psi, scenario, &plan(seed ^ 1)).unwrap();
            let mixed = ls_estimate(&f1.mix(alpha, &f2).unwrap()).unwrap().matrix;
            let expect = ls_estimate(&f1).unwrap().matrix * r(alpha)
                + ls_estimate(&f2).unwrap().matrix * r(1.0 - alpha);
            prop_assert!(frobenius_norm(&(mixed - expect)) < 1e-10);
        }

        #[test]
        fn estimates_are_hermitian_with_unit_trace(seed in any::<u64>(), scen in 0usize..4) {
            let scenario = Scenario::ALL[scen];
            let phi = spec(ChannelKind::MixedUnitary { rank: 2, base: UnitarySpec::Haar { seed } }, 2);
            let layout = Layout::new(scenario, 2).unwrap();
            let shots = layout.distributions() as u64 * 30;
            let t = sample(&phi, scenario, &SamplingPlan::new(Scheme::Fixed, shots, seed)).unwrap();
            let est = ls_estimate(&t).unwrap();
            prop_assert!(linalg::is_hermitian(&est.matrix, 1e-12));
            prop_assert!((est.trace() - 1.0).abs() < 1e-8);
        }
    }
}
