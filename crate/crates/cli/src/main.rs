//! `roughflow` command-line entry point.

mod commands;
mod configs;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "roughflow", version, about = "Ideal 2D flow around rough obstacles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override the resolution in the config.
    #[arg(long, global = true)]
    pub res: Option<usize>,
    /// Worker threads (default: logical cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Treat under-resolved geometry warnings as validation errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Recorded in the manifest; all numerics are deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a grid or particle simulation.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Capacities, Gram and coefficient matrices of a bounded domain.
    Capacity {
        /// Domain config; `--domain` is an alias.
        #[arg(long, alias = "domain")]
        config: PathBuf,
    },
    /// H¹₀ gaps of Dirichlet solutions along a family.
    Gamma {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exterior conformal map of an obstacle, with optional Carathéodory gaps.
    Conformal {
        #[arg(long)]
        config: PathBuf,
    },
    /// Convergence study.
    Study {
        kind: StudyKind,
        /// Study config; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Family id override (domain-continuity, gamma).
        #[arg(long)]
        family: Option<String>,
        /// Family parameter override.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Parse and validate a config without running it; prints it with defaults filled in.
    Validate {
        kind: ConfigKind,
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    DomainContinuity,
    CapacityDichotomy,
    ArcFlow,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConfigKind {
    Simulate,
    Capacity,
    Gamma,
    Conformal,
    DomainContinuity,
    CapacityDichotomy,
    ArcFlow,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
