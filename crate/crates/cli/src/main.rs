//! `contdyn`: run, sweep or validate a scenario configuration.
//!
//! Exit codes: 0 success, 1 invalid configuration or arguments, 2 numeric
//! event under `--strict`, 3 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contdyn::scenario::{
    config_hash, parse_config, run_scenario, run_sweep, RunOptions, ScenarioConfig, ScenarioError,
};

#[derive(Parser)]
#[command(
    name = "contdyn",
    version,
    about = "Determinant and continuity diagnostics for matrix flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; a [sweep] table, if present, is ignored.
    Run(RunArgs),
    /// Run every point of the configuration's [sweep] table.
    Sweep(RunArgs),
    /// Parse and validate the configuration without running it.
    Validate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Directory prefixed to relative output paths.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Fail with exit code 2 on singularity, blow-up, unitarity or
    /// non-finite events.
    #[arg(long)]
    strict: bool,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_STRICT: u8 = 2;
const EXIT_IO: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                ScenarioError::Io { .. } => EXIT_IO,
                ScenarioError::Parse { .. } | ScenarioError::Validation { .. } => EXIT_VALIDATION,
                ScenarioError::Numeric(_) => EXIT_STRICT,
            })
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn dispatch(command: Command) -> Result<u8, ScenarioError> {
    let (args, sweep) = match command {
        Command::Validate { config, seed } => {
            let config = load(&config, seed)?;
            let summary = serde_json::json!({
                "valid": true,
                "scenario": config.scenario,
                "config_hash": config_hash(&config),
                "sweep_points": config.sweep.as_ref().map_or(0, |s| s.values.len()),
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
            return Ok(0);
        }
        Command::Run(args) => (args, false),
        Command::Sweep(args) => (args, true),
    };
    let config = load(&args.config, args.seed)?;
    let options = RunOptions {
        output_dir: args.output_dir,
        threads: args.threads.map(|n| n as usize),
    };
    let record = if sweep {
        run_sweep(&config, &options)?
    } else {
        run_scenario(&config, &options)?
    };
    println!("{}", serde_json::to_string_pretty(&record).expect("json"));
    if args.strict && record.has_numeric_events() {
        eprintln!("error: numeric events recorded under --strict");
        return Ok(EXIT_STRICT);
    }
    Ok(0)
}
