//! `tesc` — equilibrium engine for tax-motivated transfer pricing in a
//! two-entity supply chain.
//!
//! Solves commissionaire (`c`) and limited-risk (`r`) structures from an
//! INI-style scenario file, sweeps parameters to CSV, locates tax-threshold
//! and instrument-dominance boundaries, reproduces the bundled figure
//! datasets, and self-verifies against brute-force oracles.

mod commands;
mod config;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use tesc_core::Structure;

use commands::{
    cmd_boundary, cmd_reproduce, cmd_solve, cmd_sweep, cmd_threshold, cmd_verify, load_config,
    CliError, Figure,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StructureArg {
    /// Commissionaire: headquarters chooses effort directly.
    C,
    /// Limited-risk: an incentivized agent chooses effort.
    R,
}

impl From<StructureArg> for Structure {
    fn from(v: StructureArg) -> Self {
        match v {
            StructureArg::C => Structure::Commissionaire,
            StructureArg::R => Structure::LimitedRisk,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureArg {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl From<FigureArg> for Figure {
    fn from(v: FigureArg) -> Self {
        match v {
            FigureArg::Fig4 => Figure::Fig4,
            FigureArg::Fig5 => Figure::Fig5,
            FigureArg::Fig6 => Figure::Fig6,
            FigureArg::Fig7 => Figure::Fig7,
            FigureArg::Fig8 => Figure::Fig8,
        }
    }
}

/// Exit codes: 0 success; 1 I/O or verification failure; 2 infeasible
/// scenario; 3 non-convergence; 4 configuration or usage error; 5 threshold
/// or boundary detection failure.
#[derive(Parser)]
#[command(name = "tesc", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one equilibrium and print its fields.
    Solve {
        #[arg(long, value_enum)]
        structure: StructureArg,
        #[arg(long)]
        config: PathBuf,
        /// SECTION.KEY=VALUE pairs applied after the config file.
        #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Re-solve along one parameter axis and write a CSV.
    Sweep {
        #[arg(long, value_enum)]
        structure: StructureArg,
        #[arg(long)]
        config: PathBuf,
        /// Parameter to vary (bare config key, e.g. tau0 or alpha).
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of sweep points (rows), endpoints included.
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the sweep points (default: sequential).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Locate the tax-differential turning point of consolidated profit.
    Threshold {
        #[arg(long, value_enum)]
        structure: StructureArg,
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Scan markup levels for the markup/royalty dominance boundary.
    Boundary {
        #[arg(long, value_enum)]
        structure: StructureArg,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated markup levels to scan.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Write every curve of a bundled figure dataset into a directory.
    Reproduce {
        #[arg(value_enum)]
        figure: FigureArg,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the sweep points (default: sequential).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Certify the solvers against the brute-force oracles and invariances.
    Verify {
        /// Worker threads for the scenario checks (default: sequential).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve {
            structure,
            config,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            cmd_solve(structure.into(), &cfg)
        }
        Command::Sweep {
            structure,
            config,
            param,
            from,
            to,
            steps,
            out,
            jobs,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            cmd_sweep(structure.into(), &cfg, &param, from, to, steps, &out, jobs)
        }
        Command::Threshold {
            structure,
            config,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            cmd_threshold(structure.into(), &cfg)
        }
        Command::Boundary {
            structure,
            config,
            alphas,
            out,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            cmd_boundary(structure.into(), &cfg, &alphas, &out)
        }
        Command::Reproduce { figure, out, jobs } => cmd_reproduce(figure.into(), &out, jobs),
        Command::Verify { jobs } => cmd_verify(jobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
