use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use aoi_cli::commands::{cmd_analyze, cmd_compare, cmd_simulate, cmd_sweep};
use aoi_cli::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "aoi-exp", version, about = "Peak-AoI channel access experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured access rule.
    Simulate(Common),
    /// Evaluate the analytical curves and peak AoI.
    Analyze(Common),
    /// Simulation and analysis on shared grids.
    Compare(Common),
    /// Peak AoI over the sweep values for each method.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to `outputs.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `sim.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<()> {
    let (Command::Simulate(c) | Command::Analyze(c) | Command::Compare(c) | Command::Sweep(c)) = &cli.command;
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.sim.seed = seed;
    }
    let out = c
        .out
        .clone()
        .or_else(|| cfg.outputs.directory.as_ref().map(PathBuf::from))
        .context("no output directory: pass --out or set outputs.directory")?;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Simulate(_) => cmd_simulate(&cfg, &out),
        Command::Analyze(_) => cmd_analyze(&cfg, &out),
        Command::Compare(_) => cmd_compare(&cfg, &out),
        Command::Sweep(_) => cmd_sweep(&cfg, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
