//! Seeded Monte Carlo trials and sweeps.
//!
//! A trial draws its scenario from `(master_seed, trial)`, so every method
//! and axis value of the same trial index sees the same users. Whatever the
//! method, the reported rate is the MMSE sum rate of its final positions on
//! the true channel.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{fpa_layout, pso_upper_bound, random_position_selection, TrueObjective};
use crate::environment::{ClosedBox, Environment};
use crate::error::{Error, Result};
use crate::objectives::mmse_sum_rate;
use crate::scenario::{channel_matrix, PositionVector, ScenarioParams};
use crate::seed::{derive_seed, Stream};
use crate::zo::{optimize_multi_user, optimize_single_user, Trajectory};

use super::config::{ExperimentConfig, Method, TrialSetup};

/// Environment variable holding the worker count of [`run_sweep`].
pub const WORKERS_ENV: &str = "DFPO_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub axis_value: f64,
    pub trial: usize,
    pub sum_rate: f64,
    pub pilots_consumed: usize,
    pub wall_time: f64,
}

/// A trial's outcome, with the optimizer trajectory when the method has one.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub row: ResultRow,
    pub positions: PositionVector,
    pub trajectory: Option<Trajectory>,
}

pub fn trial_scenario(config: &ExperimentConfig, setup: &TrialSetup, trial: usize) -> Result<ScenarioParams> {
    setup
        .generator
        .generate(derive_seed(config.master_seed, trial as u64, Stream::Scenario))
}

/// Runs `method` on trial `trial` of sweep point `axis_value`.
pub fn run_trial_detailed(
    config: &ExperimentConfig,
    method: Method,
    axis_value: f64,
    trial: usize,
) -> Result<TrialOutcome> {
    let start = Instant::now();
    let setup = config.setup(axis_value)?;
    let scenario = trial_scenario(config, &setup, trial)?;
    let t = trial as u64;
    let env_seed = derive_seed(config.master_seed, t, Stream::Environment);
    let opt_seed = derive_seed(config.master_seed, t, Stream::Optimizer);
    let base_seed = derive_seed(config.master_seed, t, Stream::Baseline);
    let m = setup.num_antennas;
    let pilot = setup.pilot;

    let (positions, consumed, trajectory) = match method {
        Method::Fpa => (fpa_layout(m, setup.wavelength, &setup.constraints.region)?, 0, None),
        Method::Dfpo => {
            let mut env = Environment::new(scenario.clone(), pilot, setup.budget, env_seed)?;
            let (r, traj) = if scenario.num_users() == 1 {
                optimize_single_user(&mut env, &setup.constraints, m, &setup.zo, opt_seed)?
            } else {
                optimize_multi_user(&mut env, &setup.constraints, m, &setup.zo, opt_seed)?
            };
            (r, env.budget().consumed(), Some(traj))
        }
        Method::Rps => {
            let mut env = Environment::new(scenario.clone(), pilot, setup.budget, env_seed)?;
            let r = random_position_selection(&mut env, &setup.constraints, m, setup.rps_candidates, base_seed)?;
            (r, env.budget().consumed(), None)
        }
        Method::PsoUb => {
            let objective = if scenario.num_users() == 1 {
                TrueObjective::SingleUserPower
            } else {
                TrueObjective::SumMse {
                    noise_power: pilot.noise_power,
                    transmit_power: pilot.transmit_power,
                }
            };
            let r = pso_upper_bound(&scenario, &setup.constraints, m, &setup.pso, objective, base_seed)?;
            (r, 0, None)
        }
    };

    let h = channel_matrix(&positions, &scenario);
    let sum_rate = mmse_sum_rate(&h, pilot.noise_power, pilot.transmit_power);
    Ok(TrialOutcome {
        row: ResultRow {
            method,
            axis_value,
            trial,
            sum_rate,
            pilots_consumed: consumed,
            wall_time: start.elapsed().as_secs_f64(),
        },
        positions,
        trajectory,
    })
}

pub fn run_trial(config: &ExperimentConfig, method: Method, axis_value: f64, trial: usize) -> Result<ResultRow> {
    run_trial_detailed(config, method, axis_value, trial).map(|o| o.row)
}

/// CSV sink for result rows. `wall_time` is opt-in: with it the output is no
/// longer reproducible byte for byte.
pub struct ResultWriter<W: Write> {
    inner: csv::Writer<W>,
    axis: &'static str,
    timing: bool,
}

impl<W: Write> ResultWriter<W> {
    pub fn new(out: W, axis: &'static str, timing: bool) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        let mut header = vec!["method", "axis", "axis_value", "trial", "sum_rate", "pilots_consumed"];
        if timing {
            header.push("wall_time");
        }
        inner.write_record(&header)?;
        Ok(Self { inner, axis, timing })
    }

    pub fn write(&mut self, row: &ResultRow) -> Result<()> {
        let mut rec = vec![
            row.method.to_string(),
            self.axis.to_string(),
            row.axis_value.to_string(),
            row.trial.to_string(),
            format!("{:.12}", row.sum_rate),
            row.pilots_consumed.to_string(),
        ];
        if self.timing {
            rec.push(format!("{:.6}", row.wall_time));
        }
        self.inner.write_record(&rec)?;
        self.inner.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Every (method, axis value, trial) combination in output order.
pub fn sweep_tasks(config: &ExperimentConfig) -> Vec<(Method, f64, usize)> {
    let mut tasks = Vec::new();
    for &method in &config.methods {
        for &v in &config.sweep.values {
            for trial in 0..config.trials {
                tasks.push((method, v, trial));
            }
        }
    }
    tasks
}

/// Runs the full sweep on a worker pool and streams rows to `out` in task
/// order, flushing each row as soon as all rows before it are done. The
/// output does not depend on the worker count.
pub fn run_sweep<W: Write>(config: &ExperimentConfig, out: W, timing: bool) -> Result<Vec<ResultRow>> {
    run_sweep_with_workers(config, out, timing, worker_count())
}

pub fn run_sweep_with_workers<W: Write>(
    config: &ExperimentConfig,
    out: W,
    timing: bool,
    workers: usize,
) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let tasks = sweep_tasks(config);
    let mut writer = ResultWriter::new(out, config.sweep.axis.as_str(), timing)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;

    let (tx, rx) = mpsc::channel::<(usize, Result<ResultRow>)>();
    let mut rows = Vec::with_capacity(tasks.len());
    let mut first_error = None;
    std::thread::scope(|scope| -> Result<()> {
        let tasks = &tasks;
        scope.spawn(move || {
            pool.install(|| {
                tasks.par_iter().enumerate().for_each_with(tx, |tx, (i, &(method, v, trial))| {
                    // a closed receiver means the writer already gave up
                    let _ = tx.send((i, run_trial(config, method, v, trial)));
                });
            });
        });

        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, result) in rx {
            pending.insert(i, result);
            while let Some(result) = pending.remove(&next) {
                match result {
                    Ok(row) if first_error.is_none() => {
                        writer.write(&row)?;
                        rows.push(row);
                    }
                    Ok(_) => {}
                    Err(e) => {
                        first_error.get_or_insert(e);
                    }
                }
                next += 1;
            }
        }
        Ok(())
    })?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}
