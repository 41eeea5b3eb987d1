//! `fraclv`: simulations, stability reports, basin maps and separatrix
//! traces for fractional-order Lotka-Volterra systems.

mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::RunOptions;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "fraclv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true, env = "FRACLV_CONFIG", value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for the output files (created if missing).
    #[arg(
        long,
        global = true,
        env = "FRACLV_OUT",
        value_name = "DIR",
        default_value = "."
    )]
    out: PathBuf,

    /// Output formats, comma separated. Defaults: json for stability, svg for
    /// portrait, csv otherwise.
    #[arg(
        long,
        global = true,
        env = "FRACLV_FORMAT",
        value_enum,
        value_delimiter = ','
    )]
    format: Vec<Format>,

    /// Worker threads for basin scans; 0 or unset uses every core.
    #[arg(long, global = true, env = "FRACLV_WORKERS", value_name = "N")]
    workers: Option<usize>,

    /// Report transversal self-intersections of simulated trajectories.
    #[arg(long, global = true, env = "FRACLV_DETECT_TIES")]
    detect_ties: bool,

    /// Override a config value, e.g. `--set simulate.h=0.005`. Repeatable.
    #[arg(
        long = "set",
        global = true,
        env = "FRACLV_SET",
        value_name = "KEY=VALUE",
        value_delimiter = ';'
    )]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Integrate one initial point and write the trajectory.
    Simulate,
    /// Closed-form and numeric stability of the equilibria.
    Stability,
    /// Classify a grid of initial points by their limit.
    Basin,
    /// Trace the stable manifold of the integer-order saddle.
    Separatrix,
    /// Phase portrait of several trajectories.
    Portrait,
}

fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let path = cli.config.as_ref().ok_or_else(|| {
        error::CliError::Config("--config PATH (or FRACLV_CONFIG) is required".into())
    })?;
    let cfg = RunConfig::load(path, &cli.overrides)?;
    let default = match cli.command {
        Command::Stability => Format::Json,
        Command::Portrait => Format::Svg,
        _ => Format::Csv,
    };
    let opts = RunOptions {
        out: cli.out.clone(),
        formats: if cli.format.is_empty() {
            vec![default]
        } else {
            cli.format.clone()
        },
        workers: cli.workers,
        detect_ties: cli.detect_ties,
    };
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, &opts),
        Command::Stability => commands::stability(&cfg, &opts),
        Command::Basin => commands::basin(&cfg, &opts),
        Command::Separatrix => commands::separatrix(&cfg, &opts),
        Command::Portrait => commands::portrait(&cfg, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fraclv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
