// SPDX-License-Identifier: Apache-2.0

//! `qpt`: run tomography experiments, acceptance suites and inspect result tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use plsqpt::harness::config::ExperimentKind;
use plsqpt::harness::run::median;
use plsqpt::harness::verify::{run_suite, verify_csv, Suite};
use plsqpt::harness::{run, write_outputs, ExperimentConfig};
use plsqpt::projections::Method;
use plsqpt::{QptError, Result};

const OUT_DIR_ENV: &str = "PLSQPT_OUT_DIR";

#[derive(Parser)]
#[command(name = "qpt", version, about = "Projected least-squares quantum process tomography")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; beats the config's `output_dir`.
        #[arg(long, env = OUT_DIR_ENV)]
        out_dir: Option<PathBuf>,
        /// Override the projection method.
        #[arg(long)]
        method: Option<Method>,
        /// Override the λ_min stopping tolerance of the projection.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Run an acceptance suite by name or criterion number, or `all`.
    Verify {
        suite: String,
        /// Also write verify.csv and verify.json here.
        #[arg(long, env = OUT_DIR_ENV)]
        out_dir: Option<PathBuf>,
    },
    /// Summarize an errors.csv or lambda_trace.csv file.
    Inspect { csv: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Run { config, seed, out_dir, method, epsilon } => cmd_run(&config, seed, out_dir, method, epsilon),
        Command::Verify { suite, out_dir } => cmd_verify(&suite, out_dir.as_deref()),
        Command::Inspect { csv } => cmd_inspect(&csv).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_run(
    path: &Path,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    method: Option<Method>,
    epsilon: Option<f64>,
) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = method {
        cfg.method = m;
        if cfg.experiment == ExperimentKind::AlgoComparison {
            cfg.methods = vec![m];
        }
    }
    if let Some(e) = epsilon {
        cfg.projection.epsilon = e;
    }
    let dir = out_dir.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    info!("running {} with config hash {}", cfg.experiment.name(), cfg.hash());
    let out = run(&cfg)?;
    let files = write_outputs(&out, &cfg, &dir)?;
    for f in files {
        println!("{}", dir.join(f).display());
    }
    Ok(true)
}

fn cmd_verify(selector: &str, out_dir: Option<&Path>) -> Result<bool> {
    let suites = Suite::parse_selector(selector)?;
    let mut reports = Vec::with_capacity(suites.len());
    for s in suites {
        let rep = run_suite(s)?;
        println!("{}", rep.summary_line());
        reports.push(rep);
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("verify.csv"), verify_csv(&reports)?)?;
        let json = serde_json::to_string_pretty(&reports).map_err(|e| QptError::Io(std::io::Error::other(e)))?;
        std::fs::write(dir.join("verify.json"), json + "\n")?;
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn cmd_inspect(path: &Path) -> Result<()> {
    let io = |e: csv::Error| QptError::Io(std::io::Error::other(e.to_string()));
    let mut rdr = csv::Reader::from_path(path).map_err(io)?;
    let header: Vec<String> = rdr.headers().map_err(io)?.iter().map(str::to_string).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>().map_err(io)?;
    println!("{}: {} rows; columns: {}", path.display(), rows.len(), header.join(", "));

    let num = |r: &csv::StringRecord, i: usize| r.get(i).and_then(|s| s.parse::<f64>().ok());
    if let (Some(e), Some(st), Some(m), Some(d), Some(n), Some(rk), Some(v)) =
        (col("experiment"), col("stage"), col("metric"), col("d"), col("N"), col("rank"), col("value"))
    {
        type Key = (String, String, String, u64, u64, u64);
        let mut groups: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
        for r in &rows {
            let key = (
                r[e].to_string(),
                r[st].to_string(),
                r[m].to_string(),
                r[d].parse().unwrap_or(0),
                r[n].parse().unwrap_or(0),
                r[rk].parse().unwrap_or(0),
            );
            if let Some(x) = num(r, v) {
                groups.entry(key).or_default().push(x);
            }
        }
        println!(
            "{:<28} {:<5} {:<10} {:>4} {:>10} {:>5} {:>5} {:>14}",
            "experiment", "stage", "metric", "d", "N", "rank", "reps", "median"
        );
        for ((exp, stage, metric, d, n, rank), vals) in groups {
            println!(
                "{exp:<28} {stage:<5} {metric:<10} {d:>4} {n:>10} {rank:>5} {:>5} {:>14.6e}",
                vals.len(),
                median(&vals)
            );
        }
    } else if let (Some(m), Some(l), Some(c)) = (col("method"), col("lambda_min"), col("cum_projcp_calls")) {
        let mut last: BTreeMap<String, (usize, f64, f64)> = BTreeMap::new();
        for r in &rows {
            let entry = last.entry(r[m].to_string()).or_insert((0, f64::NAN, 0.0));
            entry.0 += 1;
            entry.1 = num(r, l).unwrap_or(f64::NAN);
            entry.2 = num(r, c).unwrap_or(0.0);
        }
        println!("{:<10} {:>6} {:>14} {:>10}", "method", "rows", "final λ_min", "proj_cp");
        for (method, (count, lmin, calls)) in last {
            println!("{method:<10} {count:>6} {lmin:>14.6e} {calls:>10}");
        }
    }
    Ok(())
}
