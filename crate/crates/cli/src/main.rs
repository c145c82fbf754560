//! `critns`: scenario harness for the pseudo-spectral Navier-Stokes
//! laboratory.
//!
//! Exit codes: 0 all audits pass, 1 audit failure, 2 infrastructure error.

// Validation guards use `!(x > 0.0)`-style comparisons to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::SuiteConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("scenario error: {0}")]
    Scenario(String),
}

#[derive(Parser)]
#[command(
    name = "critns",
    version,
    about = "Mild-solution Navier-Stokes laboratory: simulate, audit, and measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suite configuration (TOML); the bundled default suite when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory override.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid mode-count override applied to every scenario.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Horizon override applied to every scenario.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Worker threads for scenario-level parallelism
    /// (CRITNS_THREADS is consulted when absent).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite: solve, audit, and persist every scenario.
    Simulate,
    /// Run the suite's audits without persisting snapshots.
    Audit,
    /// Solve-then-scale vs scale-then-solve commutation check.
    ScalingCheck,
    /// Two-bubble orthogonality sweeps (Pythagorean defect, inner product).
    Profiles,
    /// Scalar contraction-lemma demonstration table.
    ContractionDemo,
    /// Pressure recovery and the Calderon-Zygmund ratio for a scenario datum.
    Pressure {
        /// Scenario name (first scenario when omitted).
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Renormalized-family compactness diagnostic for a scenario.
    Compactness {
        /// Scenario name (first scenario when omitted).
        #[arg(long)]
        scenario: Option<String>,
        /// Number of sample times.
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
}

fn load_suite(cli: &Cli) -> Result<SuiteConfig, CliError> {
    let mut suite = match &cli.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default_suite(),
    };
    if let Some(seed) = cli.seed {
        suite.seed = seed;
    }
    if let Some(output) = &cli.output {
        suite.output_dir = output.clone();
    }
    if let Some(threads) = cli.threads {
        suite.threads = threads;
    } else if let Ok(env_threads) = std::env::var("CRITNS_THREADS") {
        suite.threads = env_threads
            .parse()
            .map_err(|_| CliError::Config(format!("bad CRITNS_THREADS value {env_threads:?}")))?;
    }
    if let Some(n) = cli.grid {
        for s in &mut suite.scenarios {
            s.grid.n_modes = n;
        }
    }
    if let Some(h) = cli.horizon {
        for s in &mut suite.scenarios {
            s.horizon = h;
        }
    }
    Ok(suite)
}

fn print_outcomes(outcomes: &[scenario::AuditOutcome]) {
    for o in outcomes {
        println!(
            "  [{}] {}: measured {:.6e} vs threshold {:.6e} ({})",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.measured,
            o.threshold,
            o.detail
        );
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Simulate | Command::Audit => {
            let suite = load_suite(cli)?;
            let persist = matches!(cli.command, Command::Simulate);
            let summary = scenario::run_suite(&suite, persist)?;
            for report in &summary.scenarios {
                println!(
                    "scenario {} ({:?})",
                    report.name, report.terminated_reason
                );
                print_outcomes(&report.audits);
            }
            if !summary.checks.is_empty() {
                println!("suite checks");
                print_outcomes(&summary.checks);
            }
            println!(
                "suite: {}",
                if summary.all_passed { "PASS" } else { "FAIL" }
            );
            Ok(summary.all_passed)
        }
        Command::ScalingCheck => {
            let suite = load_suite(cli)?;
            let cfg = suite
                .scaling_check
                .as_ref()
                .ok_or_else(|| CliError::Config("suite has no [scaling_check] section".into()))?;
            let outcome = commands::scaling_check_outcome(cfg, suite.seed)?;
            print_outcomes(std::slice::from_ref(&outcome));
            let json = serde_json::to_string_pretty(&outcome)
                .map_err(|e| CliError::Io(e.to_string()))?;
            std::fs::create_dir_all(&suite.output_dir)
                .map_err(|e| CliError::Io(e.to_string()))?;
            scenario::write_atomic(&suite.output_dir.join("scaling_check.json"), json.as_bytes())?;
            Ok(outcome.passed)
        }
        Command::Profiles => {
            let suite = load_suite(cli)?;
            let sweep = suite
                .profile_sweep
                .clone()
                .unwrap_or_else(commands::default_profile_sweep);
            let outcomes = commands::profile_sweep_outcomes(&sweep, Some(&suite.output_dir))?;
            print_outcomes(&outcomes);
            Ok(outcomes.iter().all(|o| o.passed))
        }
        Command::ContractionDemo => {
            let suite = load_suite(cli)?;
            let outcomes = commands::contraction_demo(Some(&suite.output_dir))?;
            print_outcomes(&outcomes);
            Ok(outcomes.iter().all(|o| o.passed))
        }
        Command::Pressure { scenario: name } => {
            let suite = load_suite(cli)?;
            let scenario_cfg = commands::first_scenario(&suite, name.as_deref())?;
            let outcomes =
                commands::pressure_command(scenario_cfg, suite.seed, &suite.output_dir)?;
            print_outcomes(&outcomes);
            Ok(outcomes.iter().all(|o| o.passed))
        }
        Command::Compactness {
            scenario: name,
            samples,
        } => {
            let suite = load_suite(cli)?;
            let scenario_cfg = commands::first_scenario(&suite, name.as_deref())?;
            let outcomes = commands::compactness_command(
                scenario_cfg,
                suite.seed,
                *samples,
                &suite.output_dir,
            )?;
            print_outcomes(&outcomes);
            Ok(outcomes.iter().all(|o| o.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("critns: {err}");
            ExitCode::from(2)
        }
    }
}
