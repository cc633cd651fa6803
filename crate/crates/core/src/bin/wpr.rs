use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wpr::app::{load_config, run_with_threads, Command};
use wpr::Error;

/// Batch runs for single-electron strong-field radiation studies.
#[derive(Parser, Debug)]
#[command(name = "wpr", version)]
struct Cli {
    /// trajectory | radiate | thomson-scan | wigner | ensemble | compare
    subcommand: String,
    /// Run configuration file.
    config: PathBuf,
    /// Output directory (defaults to [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides [ensemble] seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all available). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// section.key=value, repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(command) = Command::parse(&cli.subcommand) else {
        let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
        eprintln!("wpr: unknown subcommand `{}` (expected one of {})", cli.subcommand, names.join(", "));
        return ExitCode::from(2);
    };
    let config = match load_config(&cli.config, cli.seed, &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("wpr: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let threads = cli.threads.unwrap_or(0);
    match run_with_threads(command, &config, &out, threads) {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("wpr: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("wpr: {e}");
            ExitCode::from(1)
        }
    }
}
