//! Experiment harness for `grauert-core`: table and grid emitters,
//! convergence runs over divisor families, and bundled verification suites.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

use args::{Cli, Command, ConvergeCmd, CurvatureCmd, LeafCmd, MetricCmd};
use commands::Outcome;
use config::ExperimentConfig;
use error::{CliError, CliResult};
use output::{write_atomic, Artifact};

pub const THREADS_ENV: &str = "GRAUERT_THREADS";

/// Runs the parsed command; returns its outcome and the output path, which
/// for `run` may come from the config file.
pub fn execute(cli: Cli) -> CliResult<(Outcome, Option<PathBuf>)> {
    let outcome = match &cli.command {
        Command::UTable(a) => commands::u_table(a)?,
        Command::KgGrid(a) => commands::kg_grid(a)?,
        Command::Metric(MetricCmd::Eval(a)) => commands::metric_eval_cmd(a)?,
        Command::Curvature(CurvatureCmd::Hsc(a)) => commands::hsc_cmd(a)?,
        Command::Curvature(CurvatureCmd::Kplus(a)) => commands::kplus_cmd(a)?,
        Command::Curvature(CurvatureCmd::Grid(a)) => commands::curvature_grid(a)?,
        Command::Leaf(LeafCmd::Curvature(a)) => commands::leaf_curvature_cmd(a)?,
        Command::Leaf(LeafCmd::Approach(a)) => commands::leaf_approach(a)?,
        Command::Converge(ConvergeCmd::Metric(a)) => commands::converge_metric(a)?,
        Command::Converge(ConvergeCmd::Curvature(a)) => commands::converge_curvature(a)?,
        Command::Converge(ConvergeCmd::Liminf(a)) => commands::liminf(a)?,
        Command::Verify(a) => {
            let report = verify::run_suite(a.suite, a.seed);
            let value = serde_json::to_value(&report)
                .map_err(|e| CliError::Config(format!("json: {e}")))?;
            Outcome {
                artifact: Artifact::Json(value),
                pass: report.pass,
            }
        }
        Command::Run(a) => {
            let cfg = ExperimentConfig::load(&a.config)?;
            let base = a.config.parent().unwrap_or(Path::new("."));
            let inner = Cli::try_parse_from(cfg.argv(base)?)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let (outcome, out) = execute(inner)?;
            return Ok((outcome, out.or(cli.out)));
        }
    };
    Ok((outcome, cli.out))
}

/// Caps the worker pool at `GRAUERT_THREADS` when set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn emit(outcome: &Outcome, out: Option<&Path>) -> CliResult<()> {
    let bytes = outcome.artifact.bytes()?;
    match out {
        Some(path) => write_atomic(path, &bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

/// Exit status: 0 success, 1 a check failed, 2 configuration, IO or
/// numerical-domain error.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads()
        .and_then(|_| execute(cli))
        .and_then(|(outcome, out)| {
            emit(&outcome, out.as_deref())?;
            Ok(outcome.pass)
        });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
