use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use weakinv::{resolve_output_dir, run, thread_budget, verdict_exit_code, ExperimentConfig, RunError, Scenario};

#[derive(Debug, Parser)]
#[command(name = "weakinv", version, about = "Weak-invariant experiments: evolve, verify, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    Scenarios,
}

fn run_command(config: PathBuf, output_dir: Option<PathBuf>) -> Result<ExitCode, RunError> {
    let config = ExperimentConfig::load(&config)?;
    let threads = thread_budget(std::env::var(weakinv::THREADS_ENV).ok().as_deref())?;
    let dir = resolve_output_dir(output_dir.as_deref(), &config);
    let verdict = run(&config, &dir, threads)?;
    for c in verdict.failures() {
        eprintln!(
            "FAIL {}: measured {:e}, {:?} {:e} (tolerance {:e})",
            c.name, c.measured, c.comparison, c.bound_or_target, c.tolerance
        );
    }
    let passed = verdict.checks.iter().filter(|c| c.pass).count();
    println!("{}: {passed}/{} checks passed; wrote {}", verdict.scenario, verdict.checks.len(), dir.display());
    Ok(verdict_exit_code(&verdict))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Scenarios => {
            for s in Scenario::ALL {
                println!("{:<13} {}\n{:<13} [{}]", s.name(), s.summary(), "", s.anchor());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, output_dir } => run_command(config, output_dir).unwrap_or_else(|e| {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }),
    }
}
