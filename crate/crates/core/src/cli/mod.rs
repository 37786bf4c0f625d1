//! Command-line front end behind the `starcons` binary.
//!
//! Every command writes CSV (default) or JSON to `--out` or stdout, plus a
//! [`RunManifest`] to `<out>.manifest.json` (stderr when printing to
//! stdout). Exit codes: 0 success, 1 usage or input error, 2 numerical
//! failure, 3 validation failure.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use commands::*;
pub use output::{fmt_list, fmt_num, fmt_opt, manifest_path, round_json, round_sig, Format, Output, RunManifest};

use crate::numopt::OptimizerConfig;
use crate::sim::SimulationConfig;
use crate::topology::BranchSpec;
use crate::weights::{Scheme, StratifiedWeights};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "starcons", version, about = "Optimal consensus weights on generic star networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SLEM and weights of one spec under one scheme.
    Slem {
        /// Topology JSON: {"m": [...], "n": [...], "K": k}.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "optimal")]
        scheme: Scheme,
        /// Also write the weights as JSON here.
        #[arg(long)]
        weights_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form SLEM over the 9 × 6 length/count grid.
    Table1 {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// K_max of one spec, or of the whole grid with --table2.
    Kmax {
        #[arg(long, required_unless_present = "table2", conflicts_with = "table2")]
        spec: Option<PathBuf>,
        #[arg(long)]
        table2: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Numeric and closed-form SLEM as the number of centers varies.
    SweepK {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        k_from: usize,
        /// Defaults to K_max + 10.
        #[arg(long)]
        k_to: Option<usize>,
        /// Subgradient warm-start iterations per K.
        #[arg(long, default_value_t = SWEEP_SUBGRADIENT_ITERATIONS)]
        iterations: usize,
        #[arg(long, default_value_t = crate::numopt::DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mean normalized error traces of the consensus iteration.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Repeatable; defaults to the four compared schemes.
        #[arg(long)]
        scheme: Vec<Scheme>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write every trial's curve as CSV (scheme, trial, iteration, error).
        #[arg(long)]
        dump_trials: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Invariant checks on a spec, optionally with a weights file.
    Validate {
        #[arg(long)]
        spec: PathBuf,
        /// JSON weights as written by `slem --weights-out`.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Skip the numerical optimizer comparison.
        #[arg(long)]
        no_oracle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_spec(path: &Path, manifest: &mut RunManifest) -> Result<BranchSpec> {
    let spec = BranchSpec::load(path)?;
    manifest.inputs.push(format!("{} {spec}", path.display()));
    Ok(spec)
}

pub fn load_weights(path: &Path) -> Result<StratifiedWeights> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Runs one command and returns its exit code.
pub fn run(command: Command) -> Result<i32> {
    let started = Instant::now();
    match command {
        Command::Slem { spec, scheme, weights_out, output } => {
            let mut manifest = RunManifest::new("slem");
            let spec = load_spec(&spec, &mut manifest)?;
            manifest.schemes.push(scheme.to_string());
            let row = cmd_slem(&spec, scheme)?;
            if row.singleton_branches {
                manifest.notes.push("spec has n_p = 1 branch types".into());
            }
            if let Some(path) = &weights_out {
                std::fs::write(path, serde_json::to_string_pretty(&row.weights)? + "\n")?;
                manifest.outputs.push(path.display().to_string());
            }
            emit(&slem_output(&row)?, &output, manifest, started)?;
        }
        Command::Table1 { output } => {
            let mut manifest = RunManifest::new("table1");
            manifest.schemes.push(Scheme::Optimal.to_string());
            manifest.notes.push("every column has an n_p = 1 branch type".into());
            emit(&table1_output(&cmd_table1()?), &output, manifest, started)?;
        }
        Command::Kmax { spec, table2, output } => {
            let mut manifest = RunManifest::new("kmax");
            let out = if table2 {
                table2_output(&cmd_table2()?)
            } else {
                let path = spec.ok_or_else(|| Error::InvalidSpec("--spec or --table2 required".into()))?;
                let spec = load_spec(&path, &mut manifest)?;
                let k = cmd_kmax(&spec)?;
                Output {
                    header: vec!["m".into(), "n".into(), "k_max".into()],
                    rows: vec![vec![fmt_list(spec.lengths()), fmt_list(spec.counts()), k.to_string()]],
                    json: json!({ "spec": spec, "k_max": k }),
                }
            };
            emit(&out, &output, manifest, started)?;
        }
        Command::SweepK { spec, k_from, k_to, iterations, tol, output } => {
            let mut manifest = RunManifest::new("sweep-k");
            let spec = load_spec(&spec, &mut manifest)?;
            manifest.schemes.extend([Scheme::Optimal.to_string(), Scheme::Numeric.to_string()]);
            let k_to = match k_to {
                Some(k) => k,
                None => cmd_kmax(&spec)? + 10,
            };
            let config = OptimizerConfig { tol, subgradient_iterations: iterations, ..OptimizerConfig::default() };
            let sweep = cmd_sweep_k(&spec, k_from..=k_to, &config)?;
            if let Some(k) = sweep.numeric_argmin() {
                manifest.notes.push(format!("numeric minimum at K = {k}, K_max = {}", sweep.k_max));
            }
            emit(&sweep_output(&sweep)?, &output, manifest, started)?;
        }
        Command::Simulate { spec, scheme, trials, iterations, seed, dump_trials, output } => {
            let mut manifest = RunManifest::new("simulate");
            let spec = load_spec(&spec, &mut manifest)?;
            let schemes = if scheme.is_empty() { Scheme::COMPARED.to_vec() } else { scheme };
            manifest.schemes = schemes.iter().map(|s| s.to_string()).collect();
            manifest.seed = Some(seed);
            let config = SimulationConfig { trials, iterations, seed, keep_trials: dump_trials.is_some() };
            let traces = cmd_simulate(&spec, &schemes, &config)?;
            if let Some(path) = &dump_trials {
                write_trials(path, &traces)?;
                manifest.outputs.push(path.display().to_string());
            }
            for t in &traces {
                manifest.notes.extend(t.trace.warnings.iter().map(|w| format!("{}: {w}", t.scheme)));
            }
            emit(&simulate_output(&traces)?, &output, manifest, started)?;
        }
        Command::Validate { spec, weights, no_oracle, seed, output } => {
            let mut manifest = RunManifest::new("validate");
            let spec = load_spec(&spec, &mut manifest)?;
            let weights = match &weights {
                Some(p) => {
                    manifest.inputs.push(p.display().to_string());
                    Some(load_weights(p)?)
                }
                None => None,
            };
            manifest.seed = Some(seed);
            let options = ValidateOptions { weights, oracle: !no_oracle, seed, ..ValidateOptions::default() };
            let report = cmd_validate(&spec, &options)?;
            emit(&validate_output(&report)?, &output, manifest, started)?;
            if !report.passed() {
                for c in report.checks.iter().filter(|c| c.status == CheckStatus::Fail) {
                    eprintln!("FAIL {}: {}", c.name, c.detail);
                }
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(EXIT_OK)
}

fn emit(out: &Output, args: &OutputArgs, manifest: RunManifest, started: Instant) -> Result<RunManifest> {
    output::emit(out, args.format, args.out.as_deref(), manifest, started)
}

pub fn slem_output(row: &SlemRow) -> Result<Output> {
    Ok(Output {
        header: ["m", "n", "K", "scheme", "slem", "theta", "weights"].map(String::from).to_vec(),
        rows: vec![vec![
            fmt_list(row.spec.lengths()),
            fmt_list(row.spec.counts()),
            row.spec.cores().to_string(),
            row.scheme.to_string(),
            fmt_num(row.slem),
            fmt_opt(row.theta),
            row.weights.flat().iter().map(|&w| fmt_num(w)).collect::<Vec<_>>().join(" "),
        ]],
        json: serde_json::to_value(row)?,
    })
}

fn grid_header() -> Vec<String> {
    std::iter::once("m".to_string()).chain(TABLE_COUNTS.iter().map(|n| format!("n={}", fmt_list(n)))).collect()
}

pub fn table1_output(grid: &[Vec<f64>]) -> Output {
    Output {
        header: grid_header(),
        rows: grid
            .iter()
            .zip(TABLE_LENGTHS)
            .map(|(r, m)| std::iter::once(fmt_list(&m)).chain(r.iter().map(|&x| fmt_num(x))).collect())
            .collect(),
        json: json!({ "lengths": TABLE_LENGTHS, "counts": TABLE_COUNTS, "slem": grid }),
    }
}

pub fn table2_output(grid: &[Vec<usize>]) -> Output {
    Output {
        header: grid_header(),
        rows: grid
            .iter()
            .zip(TABLE_LENGTHS)
            .map(|(r, m)| std::iter::once(fmt_list(&m)).chain(r.iter().map(|k| k.to_string())).collect())
            .collect(),
        json: json!({ "lengths": TABLE_LENGTHS, "counts": TABLE_COUNTS, "k_max": grid }),
    }
}

pub fn sweep_output(sweep: &Sweep) -> Result<Output> {
    Ok(Output {
        header: ["K", "slem_closed_form", "slem_numeric", "converged", "gap_bound", "iterations"]
            .map(String::from)
            .to_vec(),
        rows: sweep
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    fmt_opt(r.closed_form_slem),
                    fmt_num(r.numeric_slem),
                    r.converged.to_string(),
                    fmt_opt(r.gap_bound),
                    r.iterations.to_string(),
                ]
            })
            .collect(),
        json: serde_json::to_value(sweep)?,
    })
}

pub fn simulate_output(traces: &[SchemeTrace]) -> Result<Output> {
    let len = traces.first().map_or(0, |t| t.trace.mean_error.len());
    let header = std::iter::once("iteration".to_string()).chain(traces.iter().map(|t| t.scheme.to_string())).collect();
    let rows = (0..len)
        .map(|i| {
            std::iter::once(i.to_string()).chain(traces.iter().map(|t| fmt_num(t.trace.mean_error[i]))).collect()
        })
        .collect();
    let summary: Vec<_> = traces
        .iter()
        .map(|t| {
            json!({
                "scheme": t.scheme,
                "slem": t.slem,
                "fitted_slope": t.fitted_slope,
                "log_slem": t.slem.ln(),
                "mean_error": t.trace.mean_error,
                "warnings": t.trace.warnings,
            })
        })
        .collect();
    Ok(Output { header, rows, json: json!({ "traces": summary }) })
}

fn write_trials(path: &Path, traces: &[SchemeTrace]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scheme", "trial", "iteration", "error"])?;
    for t in traces {
        for (k, curve) in t.trace.per_trial.iter().flatten().enumerate() {
            for (i, &e) in curve.iter().enumerate() {
                w.write_record([t.scheme.to_string(), k.to_string(), i.to_string(), fmt_num(e)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn validate_output(report: &ValidationReport) -> Result<Output> {
    Ok(Output {
        header: ["check", "status", "detail"].map(String::from).to_vec(),
        rows: report
            .checks
            .iter()
            .map(|c| vec![c.name.clone(), serde_json::to_value(c.status).map(|v| v.as_str().unwrap_or("").to_string()).unwrap_or_default(), c.detail.clone()])
            .collect(),
        json: json!({ "spec": report.spec, "passed": report.passed(), "checks": report.checks }),
    })
}
