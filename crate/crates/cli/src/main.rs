//! `qdecay`: pole tables, time evolution, Crank-Nicolson comparison and
//! survival probabilities as CSV.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use quantum_decay::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "qdecay", version, about = "Decay of quantum states by pole expansion")]
struct Cli {
    /// TOML run configuration; missing keys take their defaults.
    #[arg(long, global = true, env = "QDECAY_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "QDECAY_OUT")]
    out: Option<PathBuf>,
    /// Significant digits (1..=15).
    #[arg(long, global = true, env = "QDECAY_PRECISION")]
    precision: Option<u32>,
    #[arg(long, global = true, env = "QDECAY_KMAX")]
    kmax: Option<f64>,
    #[arg(long, global = true, env = "QDECAY_ALPHA")]
    alpha: Option<f64>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true, env = "QDECAY_QUIET")]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pole table with residues and the argument-principle audit.
    Poles,
    /// psi(r, t) with the exponential and algebraic reference curves.
    Evolve,
    /// Crank-Nicolson against the expansion.
    CompareCn,
    /// Survival probability and its t^-3 asymptote.
    Survival,
    /// Print the effective configuration as TOML.
    Config,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::PoleCount { .. } | Error::DegeneratePoles(..) => 4,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(x) = &cli.out {
        cfg.output.dir = x.clone();
    }
    if let Some(x) = cli.precision {
        cfg.expansion.precision = x;
    }
    if let Some(x) = cli.kmax {
        cfg.expansion.k_max = x;
    }
    if let Some(x) = cli.alpha {
        cfg.expansion.alpha = x;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String, Error> {
    let cfg = effective_config(cli)?;
    match cli.command {
        Command::Poles => commands::cmd_poles(&cfg),
        Command::Evolve => commands::cmd_evolve(&cfg),
        Command::CompareCn => commands::cmd_compare_cn(&cfg),
        Command::Survival => commands::cmd_survival(&cfg),
        Command::Config => cfg.to_toml(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            if !cli.quiet {
                print!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qdecay: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
