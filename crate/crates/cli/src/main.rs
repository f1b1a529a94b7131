use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use amrmc_cli::dispatch::THREADS_ENV;
use amrmc_cli::{dispatch_with, parse_config_with, resolve_threads, CliError, Overrides, Subcommand, EXIT_IO};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Price,
    Sweep,
    Moments,
    Bounds,
    Critical,
    Check,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Price => Subcommand::Price,
            Command::Sweep => Subcommand::Sweep,
            Command::Moments => Subcommand::Moments,
            Command::Bounds => Subcommand::Bounds,
            Command::Critical => Subcommand::Critical,
            Command::Check => Subcommand::Check,
        }
    }
}

/// Regression Monte Carlo for Bermudan options: pricing, error sweeps and
/// closed-form error analysis.
#[derive(Debug, Parser)]
#[command(name = "amrmc", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration document (standard input if omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Data output path (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker cap; falls back to AMRMC_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Base seed, overriding the document's base_seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let document = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(e.to_string()))?;
            s
        }
    };
    let overrides = Overrides { subcommand: Some(cli.command.into()), base_seed: cli.seed };
    let config = parse_config_with(&document, &overrides).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut stderr = std::io::stderr();
    let echo = serde_json::to_string(&config).expect("configurations serialize");
    let _ = writeln!(stderr, "config: {echo}");
    let env = std::env::var(THREADS_ENV).ok();
    let threads = resolve_threads(cli.threads, config.threads, env.as_deref())?;
    dispatch_with(&config, threads, cli.out.as_deref(), &mut stderr)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { amrmc_cli::EXIT_VALIDATION as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            let code = e.exit_code();
            debug_assert!(code <= EXIT_IO);
            ExitCode::from(code as u8)
        }
    }
}
