use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cribmac::harness::{error_json, run, Command, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "cribmac",
    version,
    about = "Cribbing MAC resolvability and secrecy experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment config (JSON, schema_version 1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Union rate region and its frontier.
    Region,
    /// Monte Carlo expected output divergence over an n sweep.
    Simulate,
    /// Exact leakage and error probability of secrecy codes.
    Secrecy,
    /// Exact block-Markov chain diagnostics.
    Chain,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Region => Command::Region,
        Cmd::Simulate => Command::Simulate,
        Cmd::Secrecy => Command::Secrecy,
        Cmd::Chain => Command::Chain,
    };
    let result = (|| {
        let path = cli
            .config
            .ok_or_else(|| cribmac::Error::Config("--config <path> is required".into()))?;
        let cfg = ExperimentConfig::load(path, cli.seed)?;
        run(command, &cfg)?.write(&cli.out)
    })();
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
