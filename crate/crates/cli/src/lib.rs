//! Experiment runner for the weak-invariant engine.
//!
//! A run loads an [`ExperimentConfig`], executes one scenario and writes
//! `series.csv` plus `verdict.json` (and scenario-specific extras) into the
//! output directory.

pub mod config;
pub mod report;
pub mod scenarios;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub use config::{ConfigError, ExperimentConfig, Scenario};
pub use report::{Check, VerdictReport};

pub const DEFAULT_OUTPUT_DIR: &str = "weakinv-out";
pub const THREADS_ENV: &str = "WEAKINV_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical abort: {0}")]
    Numerical(weakinv_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io { .. } => 4,
        }
    }
}

impl From<weakinv_core::Error> for RunError {
    fn from(e: weakinv_core::Error) -> Self {
        use weakinv_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::InvalidStep { .. } | E::InvalidInterval { .. } | E::InvalidOrder { .. } => {
                RunError::Config(ConfigError::Invalid(e.to_string()))
            }
            other => RunError::Numerical(other),
        }
    }
}

/// Exit status of a completed run: 0 when every check passes, 1 otherwise.
pub fn verdict_exit_code(verdict: &VerdictReport) -> ExitCode {
    if verdict.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Worker count for fuzzing: `WEAKINV_THREADS` if set, capped by the
/// available parallelism.
pub fn thread_budget(env: Option<&str>) -> Result<usize, ConfigError> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match env {
        None => Ok(available),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n.min(available)),
            _ => Err(ConfigError::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
    }
}

/// `--output-dir`, then the config's `output_dir`, then the default.
pub fn resolve_output_dir(cli: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_owned(), source }
}

/// Runs one scenario and writes its artifacts. A numerical abort still
/// leaves a `verdict.json` carrying the diagnostic.
pub fn run(config: &ExperimentConfig, output_dir: &Path, threads: usize) -> Result<VerdictReport, RunError> {
    std::fs::create_dir_all(output_dir).map_err(io_err(output_dir))?;
    let verdict_path = output_dir.join("verdict.json");
    let name = config.scenario.name();
    let outcome = match scenarios::execute(config, threads) {
        Ok(o) => o,
        Err(e) => {
            let err = RunError::from(e);
            if let RunError::Numerical(_) = err {
                VerdictReport::aborted(name, err.to_string()).write(&verdict_path).map_err(io_err(&verdict_path))?;
            }
            return Err(err);
        }
    };
    for (file, table) in &outcome.tables {
        let path = output_dir.join(file);
        table.write(&path).map_err(io_err(&path))?;
    }
    let verdict = VerdictReport::from_checks(name, outcome.checks, outcome.notes);
    verdict.write(&verdict_path).map_err(io_err(&verdict_path))?;
    Ok(verdict)
}
