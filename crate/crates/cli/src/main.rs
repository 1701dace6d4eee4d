//! `parawell`: parallel-in-time solver laboratory for 2D stochastic
//! Maxwell equations with damping and multiplicative noise.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{parse_config, Validated};

#[derive(Parser, Debug)]
#[command(
    name = "parawell",
    version,
    about = "Parareal solver laboratory for stochastic Maxwell equations",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides output_dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Base seed (overrides study.seed).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Monte Carlo sample count (overrides study.samples).
    #[arg(long, global = true, value_name = "M")]
    samples: Option<u32>,

    /// Worker threads; 0 uses every core (overrides threads).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<u32>,

    /// Repeatable 'key=value' config override, e.g. --set coefficients.sigma=2.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// One parareal run with per-iteration errors.
    SingleRun,
    /// Mean-square convergence order over the coarse-step grid.
    Converge,
    /// Error decay over iterations for each damping coefficient.
    Damping,
    /// Long-horizon error trajectories.
    Longtime,
    /// Measured wall-clock comparison against the sequential exponential method.
    Efficiency,
    /// Cost-model predictions (optionally with micro-benchmarked taus).
    Costmodel,
    /// Invariant suite: operator, noise and parareal properties.
    Selftest,
}

fn overrides_from(cli: &Cli) -> Result<Vec<(String, String)>, String> {
    let mut sets = Vec::new();
    for item in &cli.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("--set expects key=value, got '{item}'"))?;
        sets.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = cli.seed {
        sets.push(("study.seed".into(), seed.to_string()));
    }
    if let Some(samples) = cli.samples {
        sets.push(("study.samples".into(), samples.to_string()));
    }
    if let Some(threads) = cli.threads {
        sets.push(("threads".into(), threads.to_string()));
    }
    if let Some(out) = &cli.out {
        sets.push(("output_dir".into(), format!("{:?}", out.display().to_string())));
    }
    Ok(sets)
}

fn load(cli: &Cli) -> anyhow::Result<Validated> {
    let sets = overrides_from(cli).map_err(anyhow::Error::msg)?;
    parse_config(cli.config.as_deref(), &sets)?.validate()
}

fn dispatch(command: Command, v: &Validated) -> anyhow::Result<ExitCode> {
    match command {
        Command::SingleRun => commands::cmd_single_run(v)?,
        Command::Converge => commands::cmd_converge(v)?,
        Command::Damping => commands::cmd_damping(v)?,
        Command::Longtime => commands::cmd_longtime(v)?,
        Command::Efficiency => commands::cmd_efficiency(v)?,
        Command::Costmodel => commands::cmd_costmodel(v)?,
        Command::Selftest => {
            return Ok(if commands::cmd_selftest() { ExitCode::SUCCESS } else { ExitCode::from(3) });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let validated = match load(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };

    if validated.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(validated.threads as usize)
            .build_global()
        {
            eprintln!("error: building thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    if let Err(e) = commands::prepare_output(&validated) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }

    match dispatch(cli.command, &validated) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
