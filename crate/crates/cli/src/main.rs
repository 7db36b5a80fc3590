use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use vesicle_core::run::{convergence_table, output_root, run, RunConfig, Setup, OUTPUT_ROOT_ENV};

/// Vesicle suspension simulations.
#[derive(Parser)]
#[command(version, about, after_help = format!("Relative output directories are resolved against ${OUTPUT_ROOT_ENV} (default: the working directory)."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run { config: PathBuf },
    /// Fixed-step convergence sweep over several step counts.
    Sweep {
        config: PathBuf,
        /// Comma-separated step counts, e.g. 125,250,500.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
    },
    /// Check a config and build its initial state without running.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let c = load(&config)?;
            let out = run(&c)?;
            let s = &out.summary;
            println!(
                "{}: t = {} e_A = {:.3e} e_L = {:.3e} accepted {} rejected {} matvecs {} ({:.1} s)",
                s.name,
                s.final_time,
                s.area_error,
                s.length_error,
                s.accepted,
                s.rejected,
                s.stats.matvecs,
                s.wall_clock_seconds
            );
        }
        Command::Sweep { config, m } => {
            if m.len() < 2 {
                bail!("a sweep needs at least two step counts");
            }
            let c = load(&config)?;
            let dir = c.output.dir.clone().map_or_else(
                || output_root().join(format!("{}-sweep", c.name)),
                |d| output_root().join(d),
            );
            let table = convergence_table(&c, &m, Some(&dir))?;
            println!(
                "{:>8} {:>12} {:>12} {:>12} {:>10}",
                "m", "dt", "e_A", "e_L", "matvecs"
            );
            for r in &table.rows {
                println!(
                    "{:>8} {:>12.4e} {:>12.3e} {:>12.3e} {:>10}",
                    r.m, r.dt, r.area_error, r.length_error, r.matvecs
                );
            }
            println!(
                "order: area {:.2}, length {:.2}",
                table.area_order, table.length_order
            );
        }
        Command::Validate { config } => {
            let c = load(&config)?;
            let s = Setup::build(&c)?;
            let m = s.initial.len();
            println!(
                "{}: ok ({m} vesicle{}, N = {})",
                c.name,
                if m == 1 { "" } else { "s" },
                c.n
            );
        }
    }
    Ok(())
}
