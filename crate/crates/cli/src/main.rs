//! `anisoreg`: check the hypotheses of a degenerate anisotropic energy,
//! minimize it on a grid, and verify the regularity proof chain empirically.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cmd_check, cmd_diagnose, cmd_solve, EXIT_INPUT};
use config::parse_config;

#[derive(Parser)]
#[command(name = "anisoreg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the exponent hypotheses and write the derived-exponent report.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's `output`, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the configured energy under its Dirichlet boundary data.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run even when the hypothesis check fails.
        #[arg(long)]
        force: bool,
    },
    /// Run the regularity diagnostics on a solved field.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        /// Field CSV produced by `solve`.
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() {
    if let Ok(v) = std::env::var("ANISOREG_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                // ignore failure if a pool already exists
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn load(config: &PathBuf) -> Result<config::RunConfig, i32> {
    let text = std::fs::read_to_string(config).map_err(|e| {
        eprintln!("cannot read {}: {e}", config.display());
        EXIT_INPUT
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("{e}");
        EXIT_INPUT
    })
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Check { config, out } => match load(config) {
            Ok(cfg) => cmd_check(&cfg, out.as_deref()),
            Err(code) => return ExitCode::from(code as u8),
        },
        Command::Solve { config, out, force } => match load(config) {
            Ok(cfg) => cmd_solve(&cfg, out.as_deref(), *force),
            Err(code) => return ExitCode::from(code as u8),
        },
        Command::Diagnose { config, field, out } => match load(config) {
            Ok(cfg) => cmd_diagnose(&cfg, field, out.as_deref()),
            Err(code) => return ExitCode::from(code as u8),
        },
    };
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
