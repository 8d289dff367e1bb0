// SPDX-License-Identifier: Apache-2.0

//! Seeded multi-repetition experiment runs and their CSV tables.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ExperimentKind, SweepPoint};
use crate::channel::{choi_of, distances, fidelity, ChoiMatrix, Metric};
use crate::error::{QptError, Result};
use crate::estimators::ls_estimate;
use crate::linalg::CMatrix;
use crate::projections::{
    first_step, pls_pipeline, project_to_cptp, Method, PipelineConfig, ProjectionReport, TraceRow,
};
use crate::simulator::{sample, SamplingPlan};

pub const ERRORS_HEADER: [&str; 13] = [
    "experiment", "scenario", "k", "d", "channel", "rank", "N", "repetition", "seed", "metric", "stage",
    "value", "wall_time_ms",
];

pub const LAMBDA_HEADER: [&str; 5] = ["method", "iteration", "mode", "lambda_min", "cum_projcp_calls"];

/// Seed of one repetition: leading bytes of `SHA-256(base ‖ point ‖ repetition)`.
pub fn derive_seed(base: u64, point: usize, repetition: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update((point as u64).to_le_bytes());
    h.update((repetition as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Trace, Frobenius and operator distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Errors {
    pub trace: f64,
    pub frobenius: f64,
    pub operator: f64,
}

impl Errors {
    fn between(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let [trace, frobenius, operator] = distances(a, b)?;
        Ok(Self { trace, frobenius, operator })
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Trace => self.trace,
            Metric::Frobenius => self.frobenius,
            Metric::Operator => self.operator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub method: Method,
    pub iterations: usize,
    pub proj_cp_calls: usize,
    pub final_lambda_min: f64,
    pub mixing_p: f64,
    pub converged: bool,
}

impl From<&ProjectionReport> for ReportSummary {
    fn from(r: &ProjectionReport) -> Self {
        Self {
            method: r.method,
            iterations: r.iterations,
            proj_cp_calls: r.proj_cp_calls,
            final_lambda_min: r.final_lambda_min,
            mixing_p: r.mixing_p,
            converged: r.converged,
        }
    }
}

/// Outcome of one projection method inside a repetition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub summary: ReportSummary,
    pub errors: Errors,
    pub fidelity: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub point: usize,
    pub repetition: usize,
    pub seed: u64,
    pub ls: Errors,
    pub cp1: Errors,
    pub cp1_rank: usize,
    pub tau: f64,
    /// One entry for pipeline experiments, one per method for algorithm comparisons.
    pub outcomes: Vec<MethodOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ls_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cp1_ms: Option<f64>,
}

impl RunRecord {
    /// The pipeline outcome (first method).
    pub fn pls(&self) -> &MethodOutcome {
        &self.outcomes[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub config_hash: String,
    pub experiment: ExperimentKind,
    pub points: Vec<SweepPoint>,
    pub records: Vec<RunRecord>,
}

fn elapsed_ms(t: Instant, on: bool) -> Option<f64> {
    on.then(|| t.elapsed().as_secs_f64() * 1e3)
}

fn run_repetition(cfg: &ExperimentConfig, point: &SweepPoint, truth: &ChoiMatrix, rep: usize) -> Result<RunRecord> {
    let timed = cfg.record_wall_time;
    let seed = derive_seed(cfg.seed, point.index, rep);
    let table = sample(truth, point.scenario, &SamplingPlan::new(cfg.scheme, point.shots, seed))?;

    let t = Instant::now();
    let ls = ls_estimate(&table)?;
    let ls_ms = elapsed_ms(t, timed);
    let ls_err = Errors::between(&ls.matrix, truth.matrix())?;

    if cfg.experiment != ExperimentKind::AlgoComparison {
        let t = Instant::now();
        let pipe = PipelineConfig { method: cfg.method, projection: cfg.projection, direct: cfg.direct };
        let out = pls_pipeline(&ls, &pipe)?;
        let wall_ms = elapsed_ms(t, timed);
        let outcome = MethodOutcome {
            summary: ReportSummary::from(&out.report),
            errors: Errors::between(out.estimate.matrix(), truth.matrix())?,
            fidelity: fidelity(truth.matrix(), out.estimate.matrix())?,
            trace: out.report.trace.clone(),
            wall_ms,
        };
        return Ok(RunRecord {
            point: point.index,
            repetition: rep,
            seed,
            ls: ls_err,
            cp1: Errors::between(&out.cp1, truth.matrix())?,
            cp1_rank: out.cp1_rank,
            tau: out.tau,
            outcomes: vec![outcome],
            ls_ms,
            cp1_ms: None,
        });
    }

    let t = Instant::now();
    let (start, tau, cp1_rank) = first_step(&ls, cfg.direct)?;
    let cp1_ms = elapsed_ms(t, timed);
    let mut outcomes = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let t = Instant::now();
        let (est, report) = project_to_cptp(&start, method, &cfg.projection)?;
        let wall_ms = elapsed_ms(t, timed);
        outcomes.push(MethodOutcome {
            summary: ReportSummary::from(&report),
            errors: Errors::between(est.matrix(), truth.matrix())?,
            fidelity: fidelity(truth.matrix(), est.matrix())?,
            trace: report.trace,
            wall_ms,
        });
    }
    Ok(RunRecord {
        point: point.index,
        repetition: rep,
        seed,
        ls: ls_err,
        cp1: Errors::between(&start, truth.matrix())?,
        cp1_rank,
        tau,
        outcomes,
        ls_ms,
        cp1_ms,
    })
}

/// Run every sweep point and repetition. Repetitions run in parallel; output order is
/// canonical (point, then repetition).
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let points = cfg.points()?;
    let truths: Vec<ChoiMatrix> = points.iter().map(|p| choi_of(&p.channel)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.repetitions).map(move |rep| (p, rep)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(p, rep)| run_repetition(cfg, &points[p], &truths[p], rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput { config_hash: cfg.hash(), experiment: cfg.experiment, points, records })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// `errors.csv` contents.
pub fn errors_csv(out: &RunOutput, cfg: &ExperimentConfig) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ERRORS_HEADER).map_err(csv_err)?;
    for rec in &out.records {
        let pt = &out.points[rec.point];
        let k = pt.k().map(|k| k.to_string()).unwrap_or_default();
        let common = |experiment: &str, metric: &str, stage: &str, value: f64, wall: Option<f64>| -> Vec<String> {
            vec![
                experiment.to_string(),
                pt.scenario.number().to_string(),
                k.clone(),
                pt.dim().to_string(),
                pt.channel.label(),
                pt.rank().to_string(),
                pt.shots.to_string(),
                rec.repetition.to_string(),
                rec.seed.to_string(),
                metric.to_string(),
                stage.to_string(),
                format!("{value}"),
                fmt_opt(wall),
            ]
        };
        let name = cfg.experiment.name();
        for metric in Metric::ALL {
            w.write_record(common(name, metric.name(), "LS", rec.ls.get(metric), rec.ls_ms)).map_err(csv_err)?;
        }
        for metric in Metric::ALL {
            w.write_record(common(name, metric.name(), "CP1", rec.cp1.get(metric), rec.cp1_ms)).map_err(csv_err)?;
        }
        w.write_record(common(name, "rank", "CP1", rec.cp1_rank as f64, None)).map_err(csv_err)?;
        for o in &rec.outcomes {
            let label = if cfg.experiment == ExperimentKind::AlgoComparison {
                format!("{name}[{}]", o.summary.method)
            } else {
                name.to_string()
            };
            for metric in Metric::ALL {
                w.write_record(common(&label, metric.name(), "PLS", o.errors.get(metric), o.wall_ms)).map_err(csv_err)?;
            }
            w.write_record(common(&label, "fidelity", "PLS", o.fidelity, None)).map_err(csv_err)?;
        }
    }
    finish(w)
}

/// `lambda_trace.csv` contents for one repetition.
pub fn lambda_csv(rec: &RunRecord) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LAMBDA_HEADER).map_err(csv_err)?;
    for o in &rec.outcomes {
        for row in &o.trace {
            w.write_record([
                o.summary.method.name().to_string(),
                row.iteration.to_string(),
                row.mode.name().to_string(),
                format!("{}", row.lambda_min),
                row.cum_proj_cp_calls.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

fn csv_err(e: csv::Error) -> QptError {
    QptError::Io(std::io::Error::other(e.to_string()))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| QptError::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| QptError::Io(std::io::Error::other(e.to_string())))
}

/// Files written by [`write_outputs`], relative names and contents.
pub fn output_files(out: &RunOutput, cfg: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let mut files = vec![("errors.csv".to_string(), errors_csv(out, cfg)?)];
    let traced = matches!(cfg.experiment, ExperimentKind::AlgoComparison | ExperimentKind::SingleRun);
    if traced {
        for rec in &out.records {
            let name = if rec.repetition == 0 {
                "lambda_trace.csv".to_string()
            } else {
                format!("lambda_trace_rep{}.csv", rec.repetition)
            };
            files.push((name, lambda_csv(rec)?));
        }
    }
    let json = serde_json::to_string_pretty(out).map_err(|e| QptError::Io(std::io::Error::other(e.to_string())))?;
    files.push(("run.json".to_string(), json + "\n"));
    Ok(files)
}

/// Write the CSV tables and a JSON record of the run into `dir`.
pub fn write_outputs(out: &RunOutput, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let files = output_files(out, cfg)?;
    let mut names = Vec::with_capacity(files.len());
    for (name, body) in files {
        fs::write(dir.join(&name), body)?;
        names.push(name);
    }
    Ok(names)
}

/// Median of a sample; NaN for an empty one.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Per-point median of a record statistic, in point order.
pub fn medians_by_point(out: &RunOutput, stat: impl Fn(&RunRecord) -> f64) -> Vec<f64> {
    (0..out.points.len())
        .map(|p| {
            let v: Vec<f64> = out.records.iter().filter(|r| r.point == p).map(&stat).collect();
            median(&v)
        })
        .collect()
}
