// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration files.
//!
//! A config is a TOML document with a `format_version` key. Example:
//!
//! ```toml
//! format_version = 1
//! experiment = "sample_size_sweep"
//! scenario = 1
//! k = 3
//! shots = [30000, 100000, 300000, 1000000]
//! repetitions = 10
//! seed = 7
//!
//! [channel]
//! kind = "unitary"
//! unitary = { kind = "qft" }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelKind, ChannelSpec, UnitarySpec};
use crate::designs::{check_supported, Scenario};
use crate::error::{QptError, Result};
use crate::projections::{Method, ProjectionConfig};
use crate::simulator::{Layout, SamplingPlan, Scheme};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Every method in `methods` on the same thresholded estimates, with λ_min traces.
    AlgoComparison,
    SampleSizeSweep,
    /// Mixed-unitary channels of each rank in `ranks`.
    RankSweep,
    /// One point per entry of `dims`.
    DimensionSweep,
    SingleRun,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::AlgoComparison => "algo_comparison",
            ExperimentKind::SampleSizeSweep => "sample_size_sweep",
            ExperimentKind::RankSweep => "rank_sweep",
            ExperimentKind::DimensionSweep => "dimension_sweep",
            ExperimentKind::SingleRun => "single_run",
        }
    }
}

/// A scalar or a list in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

impl<T> Default for OneOrMany<T> {
    fn default() -> Self {
        OneOrMany::Many(Vec::new())
    }
}

fn default_channel() -> ChannelKind {
    ChannelKind::Unitary { unitary: UnitarySpec::Qft }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_method() -> Method {
    Method::HipSwitch
}

fn default_scheme() -> Scheme {
    Scheme::Random
}

fn default_rank_base() -> UnitarySpec {
    UnitarySpec::Qft
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub experiment: ExperimentKind,
    pub scenario: Scenario,
    /// Qubit count; alternative to `d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Dimensions for a dimension sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dims: Vec<usize>,
    #[serde(default = "default_channel")]
    pub channel: ChannelKind,
    /// Total shots; a list for sample-size sweeps. Empty in a dimension sweep means
    /// `10·9^k` for Pauli scenarios and `100·4^k` for MUB scenarios.
    #[serde(default)]
    pub shots: OneOrMany<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ranks: Vec<usize>,
    /// Base unitary of the rank-sweep channels.
    #[serde(default = "default_rank_base")]
    pub rank_base: UnitarySpec,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Projection method of the pipeline.
    #[serde(default = "default_method")]
    pub method: Method,
    /// Methods compared in `algo_comparison`.
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Project the LS estimate directly, skipping the thresholded step.
    #[serde(default)]
    pub direct: bool,
    #[serde(default)]
    pub projection: ProjectionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Fill the `wall_time_ms` column; off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_wall_time: bool,
}

/// One sweep point: everything that fixes the ground truth and the sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub scenario: Scenario,
    pub channel: ChannelSpec,
    pub shots: u64,
}

impl SweepPoint {
    pub fn dim(&self) -> usize {
        self.channel.dim
    }

    pub fn k(&self) -> Option<u32> {
        let d = self.channel.dim;
        d.is_power_of_two().then(|| d.trailing_zeros())
    }

    pub fn rank(&self) -> usize {
        self.channel.declared_rank()
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: toml::Value = toml::from_str(text).map_err(|e| QptError::Config(e.to_string()))?;
        match raw.get("format_version").and_then(toml::Value::as_integer) {
            Some(v) if v == FORMAT_VERSION as i64 => {}
            Some(v) => {
                return Err(QptError::Config(format!(
                    "format_version {v} is not supported (expected {FORMAT_VERSION})"
                )))
            }
            None => return Err(QptError::Config("missing integer key format_version".into())),
        }
        let cfg: Self = toml::from_str(text).map_err(|e| QptError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| QptError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }

    /// Base dimension from `d` or `k`.
    pub fn dim(&self) -> Result<usize> {
        match (self.d, self.k) {
            (Some(d), None) => Ok(d),
            (None, Some(k)) if (1..=16).contains(&k) => Ok(1 << k),
            (None, Some(k)) => Err(QptError::Config(format!("k = {k} outside 1..=16"))),
            (Some(d), Some(k)) if k < 16 && d == 1 << k => Ok(d),
            (Some(_), Some(_)) => Err(QptError::Config("k and d disagree".into())),
            (None, None) => Err(QptError::Config("one of k or d is required".into())),
        }
    }

    /// Expand into sweep points; checks every point and sampling plan before any compute.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let shots = self.shots.to_vec();
        let mut raw: Vec<(ChannelSpec, u64)> = Vec::new();
        match self.experiment {
            ExperimentKind::SingleRun | ExperimentKind::AlgoComparison => {
                let [n] = shots.as_slice() else {
                    return Err(QptError::Config(format!("{} takes exactly one shots value", self.experiment.name())));
                };
                raw.push((ChannelSpec::new(self.channel.clone(), self.dim()?), *n));
            }
            ExperimentKind::SampleSizeSweep => {
                if shots.is_empty() {
                    return Err(QptError::Config("sample_size_sweep needs a shots list".into()));
                }
                let d = self.dim()?;
                raw.extend(shots.iter().map(|&n| (ChannelSpec::new(self.channel.clone(), d), n)));
            }
            ExperimentKind::RankSweep => {
                if self.ranks.is_empty() {
                    return Err(QptError::Config("rank_sweep needs a ranks list".into()));
                }
                let [n] = shots.as_slice() else {
                    return Err(QptError::Config("rank_sweep takes exactly one shots value".into()));
                };
                let d = self.dim()?;
                for &rank in &self.ranks {
                    let kind = ChannelKind::MixedUnitary { rank, base: self.rank_base.clone() };
                    raw.push((ChannelSpec::new(kind, d), *n));
                }
            }
            ExperimentKind::DimensionSweep => {
                if self.dims.is_empty() {
                    return Err(QptError::Config("dimension_sweep needs a dims list".into()));
                }
                for &d in &self.dims {
                    let spec = ChannelSpec::new(self.channel.clone(), d);
                    if shots.is_empty() {
                        raw.push((spec, default_shots(self.scenario, d)?));
                    } else {
                        raw.extend(shots.iter().map(|&n| (spec.clone(), n)));
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(raw.len());
        for (index, (channel, n)) in raw.into_iter().enumerate() {
            channel.validate()?;
            check_supported(self.scenario, channel.dim)?;
            let layout = Layout::new(self.scenario, channel.dim)?;
            SamplingPlan::new(self.scheme, n, self.seed).validate(&layout)?;
            out.push(SweepPoint { index, scenario: self.scenario, channel, shots: n });
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(QptError::Config(format!("format_version must be {FORMAT_VERSION}")));
        }
        if self.repetitions == 0 {
            return Err(QptError::Config("repetitions must be at least 1".into()));
        }
        if self.experiment == ExperimentKind::AlgoComparison && self.methods.is_empty() {
            return Err(QptError::Config("algo_comparison needs at least one method".into()));
        }
        self.projection.validate()?;
        self.points().map(|_| ())
    }
}

/// Shots used by a dimension sweep when none are given.
pub fn default_shots(scenario: Scenario, d: usize) -> Result<u64> {
    if !d.is_power_of_two() {
        return Err(QptError::Config(format!("default shot rule needs a qubit dimension, d = {d}")));
    }
    let k = d.trailing_zeros();
    Ok(if scenario.uses_pauli() { 10 * 9u64.pow(k) } else { 100 * 4u64.pow(k) })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
format_version = 1
experiment = "sample_size_sweep"
scenario = 1
k = 2
shots = [1000, 2000]
repetitions = 3
seed = 5

[channel]
kind = "unitary"
unitary = { kind = "qft" }

[projection]
epsilon = 1e-8
"#;

    #[test]
    fn parses_and_expands() {
        let cfg = ExperimentConfig::from_toml(SWEEP).unwrap();
        assert_eq!(cfg.scheme, Scheme::Random);
        assert_eq!(cfg.method, Method::HipSwitch);
        assert_eq!(cfg.projection.epsilon, 1e-8);
        assert_eq!(cfg.projection.hip_steps, 30);
        let pts = cfg.points().unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].shots, 2000);
        assert_eq!(pts[0].k(), Some(2));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::from_toml(SWEEP).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn rejects_bad_configs() {
        let no_version = SWEEP.replace("format_version = 1", "");
        assert!(matches!(ExperimentConfig::from_toml(&no_version), Err(QptError::Config(_))));
        let future = SWEEP.replace("format_version = 1", "format_version = 2");
        assert!(matches!(ExperimentConfig::from_toml(&future), Err(QptError::Config(_))));
        let typo = SWEEP.replace("seed = 5", "sead = 5");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
        let bad_dim = SWEEP.replace("k = 2", "d = 3");
        assert!(matches!(ExperimentConfig::from_toml(&bad_dim), Err(QptError::InvalidDimension(_))));
        let fixed = SWEEP.replace("seed = 5", "seed = 5\nscheme = \"fixed\"");
        assert!(matches!(ExperimentConfig::from_toml(&fixed), Err(QptError::InvalidPlan(_))));
    }

    #[test]
    fn rank_and_dimension_sweeps() {
        let text = r#"
format_version = 1
experiment = "rank_sweep"
scenario = 3
d = 4
shots = 1000
ranks = [1, 2, 4]
"#;
        let pts = ExperimentConfig::from_toml(text).unwrap().points().unwrap();
        assert_eq!(pts.iter().map(SweepPoint::rank).collect::<Vec<_>>(), vec![1, 2, 4]);

        let text = r#"
format_version = 1
experiment = "dimension_sweep"
scenario = 1
dims = [2, 4]
"#;
        let pts = ExperimentConfig::from_toml(text).unwrap().points().unwrap();
        assert_eq!(pts.iter().map(|p| p.shots).collect::<Vec<_>>(), vec![90, 810]);
    }
}
