use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dfpo::experiment::{run_sweep, snr_surface, ExperimentConfig};
use dfpo::experiment::runner::{trial_scenario, worker_count};
use dfpo::{Error, Result};

/// Movable-antenna placement experiments.
///
/// Exit status: 0 on success, 2 on a configuration error, 3 on a runtime
/// error. DFPO_WORKERS sets the worker count (default: available cores).
#[derive(Parser)]
#[command(name = "dfpo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method × axis value × trial of a config and write CSV rows.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; defaults to the config's `output`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Adds a wall_time column. Output is then no longer reproducible.
        #[arg(long)]
        timing: bool,
    },
    /// Write the receive-SNR map of one probe antenna for a single-user config.
    Surface {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
        /// Trial whose scenario is mapped.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path: path.to_owned(), source })
}

/// Any failure to obtain a usable config, including an unreadable file, is a
/// configuration error.
fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).map_err(|e| match e {
        Error::Io { .. } => Error::config(e.to_string()),
        e => e,
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, trials, seed, out, timing } => {
            let mut cfg = load(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.validate()?;
            eprintln!(
                "running {} rows on {} workers",
                cfg.methods.len() * cfg.sweep.values.len() * cfg.trials,
                worker_count()
            );
            match out.or_else(|| cfg.output.clone()) {
                Some(path) => {
                    run_sweep(&cfg, create(&path)?, timing)?;
                }
                None => {
                    run_sweep(&cfg, io::stdout().lock(), timing)?;
                }
            }
        }
        Command::Surface { config, res, out, trial } => {
            let cfg = load(&config)?;
            if cfg.system.users != 1 {
                return Err(Error::config(format!("surface needs users = 1, config has {}", cfg.system.users)));
            }
            let setup = cfg.setup(cfg.sweep.values[0])?;
            let scenario = trial_scenario(&cfg, &setup, trial)?;
            let surface = snr_surface(
                &scenario,
                &setup.constraints.region,
                setup.pilot.transmit_power,
                setup.pilot.noise_power,
                res,
            )?;
            let mut w = create(&out)?;
            surface.write_csv(&mut w)?;
            w.flush().map_err(|source| Error::Io { path: out.clone(), source })?;
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!("{}: ok ({:016x})", config.display(), cfg.fingerprint());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
