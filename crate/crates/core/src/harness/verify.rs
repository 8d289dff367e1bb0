// SPDX-License-Identifier: Apache-2.0

//! Acceptance suites. Each suite measures quantities, compares them with pinned thresholds
//! and reports every comparison; failures are data, not errors.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::oracles::{oracle_proj_cp, oracle_proj_cp1, oracle_proj_tp};
use super::run::{self, derive_seed, median, medians_by_point, slope};
use crate::bounds::{self, BoundNorm, ErrorBudget};
use crate::channel::{choi_of, distance, ChannelKind, ChannelSpec, ChoiMatrix, Metric, UnitarySpec};
use crate::designs::{mub_family, near_isotropy_defect, Scenario};
use crate::error::{QptError, Result};
use crate::estimators::ls_estimate;
use crate::linalg::{self, frobenius_norm, r, CMatrix};
use crate::projections::{
    first_step, proj_cp, proj_cp1_thresholded, proj_tp, project_to_cptp, project_to_cptp_observed, Method,
    ProjectionConfig,
};
use crate::simulator::{exact_table, sample, SamplingPlan, Scheme};

/// Pinned thresholds.
pub mod limits {
    pub const IDENTIFIABILITY: f64 = 1e-9;
    pub const ISOTROPY: f64 = 1e-10;
    pub const ORACLE: f64 = 1e-6;
    /// Absolute slack for floating-point round-off in the norm inequalities.
    pub const PROPERTY_SLACK: f64 = 1e-12;
    /// Slack for the dual output, which is a projection up to its gradient tolerance.
    pub const DUAL_SLACK: f64 = 1e-9;
    pub const SLOPE_LOW: f64 = -0.6;
    pub const SLOPE_HIGH: f64 = -0.4;
    pub const LOW_RANK_FACTOR: f64 = 10.0;
    pub const RANK_STEP_RATIO: f64 = 2.2;
    pub const LAMBDA_TARGET: f64 = -1e-7;
    pub const ITERATION_CAP: usize = 500;
    pub const AGREEMENT: f64 = 1e-4;
    pub const DUAL_GRADIENT: f64 = 1e-8;
    pub const BINOMIAL_SIGMAS: f64 = 3.0;
    pub const COVERAGE_ETA: f64 = 0.05;
}

/// Base seed of every suite; each run derives its own seed from it.
const SUITE_SEED: u64 = 271_828;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identifiability,
    Isotropy,
    Oracles,
    Properties,
    Scaling,
    LowRank,
    RankMonotonicity,
    HipSpeed,
    Agreement,
    BoundValidity,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Identifiability,
        Suite::Isotropy,
        Suite::Oracles,
        Suite::Properties,
        Suite::Scaling,
        Suite::LowRank,
        Suite::RankMonotonicity,
        Suite::HipSpeed,
        Suite::Agreement,
        Suite::BoundValidity,
        Suite::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identifiability => "identifiability",
            Suite::Isotropy => "isotropy",
            Suite::Oracles => "oracles",
            Suite::Properties => "properties",
            Suite::Scaling => "scaling",
            Suite::LowRank => "low_rank",
            Suite::RankMonotonicity => "rank_monotonicity",
            Suite::HipSpeed => "hip_speed",
            Suite::Agreement => "agreement",
            Suite::BoundValidity => "bound_validity",
            Suite::Determinism => "determinism",
        }
    }

    /// Acceptance criterion number.
    pub fn criterion(self) -> u8 {
        Suite::ALL.iter().position(|&s| s == self).expect("listed") as u8 + 1
    }

    /// Parse a suite selector: a name, a criterion number, or `all`.
    pub fn parse_selector(s: &str) -> Result<Vec<Suite>> {
        let t = s.trim().to_ascii_lowercase().replace('-', "_");
        if t == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        if let Ok(n) = t.parse::<usize>() {
            return Suite::ALL
                .get(n.wrapping_sub(1))
                .map(|&s| vec![s])
                .ok_or_else(|| QptError::InvalidInput(format!("no suite number {n}")));
        }
        Ok(vec![t.parse()?])
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = QptError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace('-', "_");
        Suite::ALL.into_iter().find(|x| x.name() == t).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            QptError::InvalidInput(format!("unknown suite {s:?}; expected one of {} or all", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Below,
}

impl Relation {
    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => measured <= threshold,
            Relation::AtLeast => measured >= threshold,
            Relation::Below => measured < threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Below => "<",
        }
    }
}

/// One measured comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        // NaN never passes.
        let pass = relation.holds(measured, threshold);
        Self { name: name.into(), measured, relation, threshold, pass }
    }

    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, Relation::AtMost, threshold)
    }

    fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, Relation::AtLeast, threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub criterion: u8,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Self { suite, criterion: suite.criterion(), checks, passed }
    }

    /// Worst check: the first failing one, else the first.
    pub fn headline(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass).or(self.checks.first())
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let detail = self
            .headline()
            .map(|c| format!("{}: {:.6e} {} {:.6e}", c.name, c.measured, c.relation.symbol(), c.threshold))
            .unwrap_or_default();
        format!(
            "criterion {:>2} {:<18} {status} ({}/{} checks pass) {detail}",
            self.criterion,
            self.suite.name(),
            self.checks.len() - failed,
            self.checks.len()
        )
    }
}

/// Run one suite.
pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Identifiability => identifiability()?,
        Suite::Isotropy => isotropy()?,
        Suite::Oracles => oracles()?,
        Suite::Properties => properties()?,
        Suite::Scaling => scaling()?,
        Suite::LowRank => low_rank()?,
        Suite::RankMonotonicity => rank_monotonicity()?,
        Suite::HipSpeed => hip_speed()?,
        Suite::Agreement => agreement()?,
        Suite::BoundValidity => bound_validity()?,
        Suite::Determinism => determinism()?,
    };
    Ok(SuiteReport::new(suite, checks))
}

/// `verify.csv` contents: one row per check.
pub fn verify_csv(reports: &[SuiteReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| QptError::Io(std::io::Error::other(e.to_string()));
    w.write_record(["criterion", "suite", "check", "measured", "relation", "threshold", "pass"]).map_err(io)?;
    for rep in reports {
        for c in &rep.checks {
            w.write_record([
                rep.criterion.to_string(),
                rep.suite.name().to_string(),
                c.name.clone(),
                format!("{}", c.measured),
                c.relation.symbol().to_string(),
                format!("{}", c.threshold),
                c.pass.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| QptError::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| QptError::Io(std::io::Error::other(e.to_string())))
}

fn haar(d: usize, seed: u64) -> ChannelSpec {
    ChannelSpec::new(ChannelKind::Unitary { unitary: UnitarySpec::Haar { seed } }, d)
}

fn identifiability() -> Result<Vec<Check>> {
    let cases = [
        (Scenario::PauliChoi, 2),
        (Scenario::PauliChoi, 4),
        (Scenario::PauliIo, 2),
        (Scenario::PauliIo, 4),
        (Scenario::MubChoi, 2),
        (Scenario::MubChoi, 4),
        (Scenario::MubIo, 2),
        (Scenario::MubIo, 3),
    ];
    let mut checks = Vec::new();
    for (scenario, d) in cases {
        let channels = [
            ("haar", haar(d, derive_seed(SUITE_SEED, d, 0))),
            ("depolarizing", ChannelSpec::new(ChannelKind::Depolarizing { p: 0.3 }, d)),
        ];
        for (label, spec) in channels {
            let truth = choi_of(&spec)?;
            let ls = ls_estimate(&exact_table(&truth, scenario)?)?;
            let err = frobenius_norm(&(&ls.matrix - truth.matrix()));
            checks.push(Check::at_most(format!("scenario{}_d{d}_{label}", scenario.number()), err, limits::IDENTIFIABILITY));
        }
    }
    Ok(checks)
}

fn isotropy() -> Result<Vec<Check>> {
    [2, 3, 4, 5, 7, 8, 16]
        .into_iter()
        .map(|dim| Ok(Check::at_most(format!("D{dim}"), near_isotropy_defect(&mub_family(dim)?), limits::ISOTROPY)))
        .collect()
}

fn oracles() -> Result<Vec<Check>> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    let mut checks = Vec::new();
    for d in [2usize, 4] {
        let n = d * d;
        let inputs: Vec<CMatrix> = (0..50)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SUITE_SEED, n, i));
                linalg::random_hermitian(n, &mut rng)
            })
            .collect();
        let worst = inputs
            .par_iter()
            .map(|x| -> Result<[f64; 3]> {
                let tp = frobenius_norm(&(proj_tp(x)? - oracle_proj_tp(x, d)?));
                let cp = frobenius_norm(&(proj_cp(x)? - oracle_proj_cp(x)?));
                let t = linalg::trace(x).re;
                let unit = x + CMatrix::identity(n, n) * r((1.0 - t) / n as f64);
                let cp1 = frobenius_norm(&(proj_cp1_thresholded(&unit, 0.0)?.matrix - oracle_proj_cp1(&unit)?));
                Ok([tp, cp, cp1])
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold([0.0f64; 3], |acc, v| [acc[0].max(v[0]), acc[1].max(v[1]), acc[2].max(v[2])]);
        for (name, w) in ["proj_tp", "proj_cp", "proj_cp1"].into_iter().zip(worst) {
            checks.push(Check::at_most(format!("{name}_{n}x{n}"), w, limits::ORACLE));
        }
    }
    Ok(checks)
}

/// Violation counts of one Monte Carlo run.
#[derive(Debug, Default, Clone, Copy)]
struct Violations {
    property2: usize,
    property3: usize,
    iterates: usize,
}

fn property_run(scenario: Scenario, d: usize, seed: u64) -> Result<Violations> {
    let truth = choi_of(&haar(d, seed))?;
    let table = sample(&truth, scenario, &SamplingPlan::new(Scheme::Random, 10_000, seed))?;
    let ls = ls_estimate(&table)?;
    let (cp1, _, _) = first_step(&ls, false)?;
    let phi = truth.matrix();
    let mut v = Violations::default();

    let ls_op = distance(&ls.matrix, phi, Metric::Operator)?;
    let cp1_op = distance(&cp1, phi, Metric::Operator)?;
    if cp1_op > 2.0 * ls_op + limits::PROPERTY_SLACK {
        v.property2 += 1;
    }

    let radius = frobenius_norm(&(&cp1 - phi)) + limits::PROPERTY_SLACK;
    let cfg = ProjectionConfig::default();
    for method in [Method::HipSwitch, Method::Ap, Method::OneHip, Method::PureHip] {
        let mut bad = 0usize;
        let mut seen = 0usize;
        project_to_cptp_observed(&cp1, method, &cfg, &mut |it| {
            seen += 1;
            if frobenius_norm(&(it.matrix - phi)) > radius {
                bad += 1;
            }
        })?;
        v.property3 += bad;
        v.iterates += seen;
    }
    // Dykstra iterates are not monotone; its limit is the projection.
    let mut last: Option<CMatrix> = None;
    project_to_cptp_observed(&cp1, Method::Dykstra, &cfg, &mut |it| last = Some(it.matrix.clone()))?;
    if let Some(x) = last {
        v.iterates += 1;
        if frobenius_norm(&(x - phi)) > radius {
            v.property3 += 1;
        }
    }
    // The dual output must be at least as close to its input as any sampled physical point.
    let (dual, _) = project_to_cptp(&cp1, Method::Dual, &cfg)?;
    let own = frobenius_norm(&(dual.matrix() - &cp1));
    let others = [truth.clone(), choi_of(&haar(d, seed ^ 0x5a5a))?, choi_of(&ChannelSpec::new(ChannelKind::Depolarizing { p: 0.5 }, d))?];
    for y in &others {
        v.iterates += 1;
        if own > frobenius_norm(&(y.matrix() - &cp1)) + limits::DUAL_SLACK {
            v.property3 += 1;
        }
    }
    Ok(v)
}

fn properties() -> Result<Vec<Check>> {
    let mut jobs = Vec::new();
    for k in [1u32, 2] {
        for scenario in Scenario::ALL {
            for rep in 0..25 {
                jobs.push((scenario, 1usize << k, derive_seed(SUITE_SEED ^ 4, (k as usize) * 10 + scenario.number() as usize, rep)));
            }
        }
    }
    let all = jobs
        .par_iter()
        .map(|&(s, d, seed)| property_run(s, d, seed))
        .collect::<Result<Vec<_>>>()?;
    let total = all.iter().fold(Violations::default(), |a, v| Violations {
        property2: a.property2 + v.property2,
        property3: a.property3 + v.property3,
        iterates: a.iterates + v.iterates,
    });
    Ok(vec![
        Check::at_least("runs", all.len() as f64, 200.0),
        Check::at_most("property2_violations", total.property2 as f64, 0.0),
        Check::at_most("property3_violations", total.property3 as f64, 0.0),
        Check::at_least("property3_points_checked", total.iterates as f64, all.len() as f64),
    ])
}

fn config(text: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(text)
}

fn scaling() -> Result<Vec<Check>> {
    let cfg = config(&format!(
        r#"
format_version = 1
experiment = "sample_size_sweep"
scenario = 1
k = 3
shots = [30000, 100000, 300000, 1000000]
repetitions = 10
seed = {SUITE_SEED}
channel = {{ kind = "unitary", unitary = {{ kind = "qft" }} }}
"#
    ))?;
    let out = run::run(&cfg)?;
    let med = medians_by_point(&out, |rec| rec.pls().errors.trace);
    let x: Vec<f64> = out.points.iter().map(|p| (p.shots as f64).ln()).collect();
    let y: Vec<f64> = med.iter().map(|m| m.ln()).collect();
    let s = slope(&x, &y);
    Ok(vec![
        Check::at_least("rows", out.records.len() as f64, 40.0),
        Check::at_least("slope_low", s, limits::SLOPE_LOW),
        Check::at_most("slope_high", s, limits::SLOPE_HIGH),
    ])
}

fn low_rank() -> Result<Vec<Check>> {
    let cfg = config(&format!(
        r#"
format_version = 1
experiment = "single_run"
scenario = 1
k = 3
shots = 1000000
repetitions = 10
seed = {SUITE_SEED}
channel = {{ kind = "unitary", unitary = {{ kind = "qft" }} }}
"#
    ))?;
    let out = run::run(&cfg)?;
    let pls = median(&out.records.iter().map(|r| r.pls().errors.trace).collect::<Vec<_>>());
    let ls = median(&out.records.iter().map(|r| r.ls.trace).collect::<Vec<_>>());
    let d2 = 64.0;
    Ok(vec![Check::at_most("median_pls_over_ls", pls / ls, limits::LOW_RANK_FACTOR / d2)])
}

fn rank_monotonicity() -> Result<Vec<Check>> {
    let cfg = config(&format!(
        r#"
format_version = 1
experiment = "rank_sweep"
scenario = 1
k = 3
shots = 1000000
ranks = [1, 2, 4, 8]
repetitions = 10
seed = {SUITE_SEED}
"#
    ))?;
    let out = run::run(&cfg)?;
    let med = medians_by_point(&out, |rec| rec.pls().errors.trace);
    let mut checks = Vec::new();
    for (i, w) in med.windows(2).enumerate() {
        let (a, b) = (out.points[i].rank(), out.points[i + 1].rank());
        checks.push(Check::at_least(format!("nondecreasing_r{a}_to_r{b}"), w[1] - w[0], 0.0));
        if w[1] <= 1.0 {
            checks.push(Check::at_most(format!("ratio_r{a}_to_r{b}"), w[1] / w[0], limits::RANK_STEP_RATIO));
        }
    }
    Ok(checks)
}

fn hip_speed() -> Result<Vec<Check>> {
    let truth = choi_of(&ChannelSpec::new(ChannelKind::Unitary { unitary: UnitarySpec::Qft }, 16))?;
    let table = sample(&truth, Scenario::PauliChoi, &SamplingPlan::new(Scheme::Random, 1_000_000, 7))?;
    let (cp1, _, _) = first_step(&ls_estimate(&table)?, false)?;
    let base = ProjectionConfig { epsilon: -limits::LAMBDA_TARGET, ..ProjectionConfig::default() };
    let capped = ProjectionConfig { max_outer_iterations: limits::ITERATION_CAP, ..base };
    let outcomes = [(Method::HipSwitch, base), (Method::Ap, capped), (Method::Dykstra, capped)]
        .par_iter()
        .map(|&(m, cfg)| project_to_cptp(&cp1, m, &cfg).map(|(_, rep)| rep))
        .collect::<Result<Vec<_>>>()?;
    let (hip, ap, dyk) = (&outcomes[0], &outcomes[1], &outcomes[2]);
    Ok(vec![
        Check::at_least("hipswitch_lambda_min", hip.final_lambda_min, limits::LAMBDA_TARGET),
        Check::new("hipswitch_calls_vs_ap", hip.proj_cp_calls as f64, Relation::Below, ap.proj_cp_calls as f64),
        Check::new("hipswitch_calls_vs_dykstra", hip.proj_cp_calls as f64, Relation::Below, dyk.proj_cp_calls as f64),
        Check::new("ap_lambda_min_at_cap", ap.final_lambda_min, Relation::Below, limits::LAMBDA_TARGET),
        Check::new("dykstra_lambda_min_at_cap", dyk.final_lambda_min, Relation::Below, limits::LAMBDA_TARGET),
    ])
}

fn agreement() -> Result<Vec<Check>> {
    let cfg = ProjectionConfig::default();
    let uncapped = ProjectionConfig { max_outer_iterations: 100_000, dykstra_step_tol: 1e-12, ..cfg };
    let rows = (0..10u64)
        .into_par_iter()
        .map(|i| -> Result<[f64; 4]> {
            let seed = derive_seed(SUITE_SEED ^ 9, 0, i as usize);
            let spec = ChannelSpec::new(ChannelKind::MixedUnitary { rank: 2, base: UnitarySpec::Haar { seed } }, 4);
            let truth = choi_of(&spec)?;
            let table = sample(&truth, Scenario::PauliChoi, &SamplingPlan::new(Scheme::Random, 10_000, seed))?;
            let (cp1, _, _) = first_step(&ls_estimate(&table)?, false)?;
            let (h, _) = project_to_cptp(&cp1, Method::HipSwitch, &cfg)?;
            let (dk, _) = project_to_cptp(&cp1, Method::Dykstra, &uncapped)?;
            let (du, rep) = project_to_cptp(&cp1, Method::Dual, &cfg)?;
            let gap = |a: &ChoiMatrix, b: &ChoiMatrix| frobenius_norm(&(a.matrix() - b.matrix()));
            Ok([gap(&h, &dk), gap(&h, &du), gap(&dk, &du), rep.dual_gradient_norm.unwrap_or(f64::NAN)])
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = |j: usize| rows.iter().map(|r| r[j]).fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    Ok(vec![
        Check::at_most("hipswitch_vs_dykstra", worst(0), limits::AGREEMENT),
        Check::at_most("hipswitch_vs_dual", worst(1), limits::AGREEMENT),
        Check::at_most("dykstra_vs_dual", worst(2), limits::AGREEMENT),
        Check::at_most("dual_gradient_norm", worst(3), limits::DUAL_GRADIENT),
    ])
}

struct BoundRun {
    frobenius_error: f64,
    covered: bool,
}

fn bound_run(scenario: Scenario, seed: u64) -> Result<BoundRun> {
    let d = 2;
    let shots = 10_000;
    let truth = choi_of(&haar(d, seed))?;
    let table = sample(&truth, scenario, &SamplingPlan::new(Scheme::Random, shots, seed))?;
    let (cp1, _, _) = first_step(&ls_estimate(&table)?, false)?;
    let (est, _) = project_to_cptp(&cp1, Method::HipSwitch, &ProjectionConfig::default())?;
    let err = frobenius_norm(&(est.matrix() - truth.matrix()));
    let mut spectrum = linalg::eigvalsh(&cp1)?;
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let budget = ErrorBudget::new(scenario, 1, shots).with_eta(limits::COVERAGE_ETA);
    let region = bounds::confidence_region(&spectrum, &budget)?;
    Ok(BoundRun { frobenius_error: err, covered: err <= region.frobenius_radius })
}

fn bound_validity() -> Result<Vec<Check>> {
    let runs_per = 100usize;
    let mut checks = Vec::new();
    for scenario in Scenario::ALL {
        let runs = (0..runs_per)
            .into_par_iter()
            .map(|i| bound_run(scenario, derive_seed(SUITE_SEED ^ 10, scenario.number() as usize, i)))
            .collect::<Result<Vec<_>>>()?;
        let n = runs.len() as f64;
        // Largest excess of the empirical tail over the allowance, across the ε grid.
        let mut worst_excess = f64::NEG_INFINITY;
        let mut grid_points = 0usize;
        for step in 1..20 {
            let eps = step as f64 * 0.05;
            let b = bounds::pls_failure_prob(
                &ErrorBudget::new(scenario, 1, 10_000).with_epsilon(eps),
                BoundNorm::Frobenius,
            )?;
            if b >= 1.0 {
                continue;
            }
            grid_points += 1;
            let frac = runs.iter().filter(|r| r.frobenius_error >= eps).count() as f64 / n;
            let allowance = b + limits::BINOMIAL_SIGMAS * (b * (1.0 - b) / n).sqrt();
            worst_excess = worst_excess.max(frac - allowance);
        }
        let s = scenario.number();
        checks.push(Check::at_least(format!("scenario{s}_grid_points"), grid_points as f64, 1.0));
        checks.push(Check::at_most(format!("scenario{s}_tail_excess"), worst_excess, 0.0));
        let coverage = runs.iter().filter(|r| r.covered).count() as f64 / n;
        let p = 1.0 - limits::COVERAGE_ETA;
        let floor = p - limits::BINOMIAL_SIGMAS * (p * (1.0 - p) / n).sqrt();
        checks.push(Check::at_least(format!("scenario{s}_coverage"), coverage, floor));
    }
    Ok(checks)
}

fn determinism() -> Result<Vec<Check>> {
    let cfg = config(
        r#"
format_version = 1
experiment = "algo_comparison"
scenario = 1
k = 1
shots = 5000
repetitions = 3
seed = 11
"#,
    )?;
    let a = run::output_files(&run::run(&cfg)?, &cfg)?;
    let b = run::output_files(&run::run(&cfg)?, &cfg)?;
    let run_diff = a.iter().zip(&b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());

    let cheap = [Suite::Identifiability, Suite::Isotropy];
    let first = verify_csv(&cheap.iter().map(|&s| run_suite(s)).collect::<Result<Vec<_>>>()?)?;
    let second = verify_csv(&cheap.iter().map(|&s| run_suite(s)).collect::<Result<Vec<_>>>()?)?;
    Ok(vec![
        Check::at_most("run_files_differing", run_diff as f64, 0.0),
        Check::at_least("run_files_compared", a.len() as f64, 3.0),
        Check::at_most("verify_csv_differing", (first != second) as u8 as f64, 0.0),
    ])
}
