//! Zeroth-order position optimization.
//!
//! Each iteration spends two function evaluations, one at the current
//! positions `r` and one at `r + μu` for a random unit direction `u`, and
//! forms the gradient estimate `(2M/μ)·(f(r + μu) − f(r))·u`. The estimate
//! drives an Adam-style update with bias-corrected moments, followed by a
//! componentwise clamp back into the region. Minimum spacing is repaired
//! once at the end by [`refine_positions`].
//!
//! Function values come from pilot measurements only:
//! * one user: received power of a single pilot symbol, divided by `σ²`;
//! * several users: `σ²·tr[(ĜᴴĜ + σ²I)^{-1}]` on the least-squares estimate
//!   `Ĥ` of a `T`-symbol pilot block (the MMSE sum-MSE, in `(0, K]`).
//!
//! Both are dimensionless so the Adam guard `ε` means the same thing for
//! every transmit power.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::environment::{ls_estimate, ClosedBox};
use crate::error::{Error, Result};
use crate::objectives::sum_mse_objective;
use crate::refine::{refine_positions, PlacementConstraints};
use crate::scenario::{MovableRegion, PositionVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionMode {
    UnitSphere,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

impl ObjectiveSense {
    fn improves(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            ObjectiveSense::Maximize => candidate > incumbent,
            ObjectiveSense::Minimize => candidate < incumbent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoConfig {
    /// Adam step size α in meters.
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Smoothing radius μ in meters.
    pub smoothing: f64,
    /// Number of random initial candidates `P_i`.
    pub init_candidates: usize,
    /// Number of gradient iterations `P_z`.
    pub iterations: usize,
    pub epsilon_guard: f64,
    pub direction_mode: DirectionMode,
}

impl ZoConfig {
    /// α = 0.02λ, μ = 0.3λ, β1 = 0.9, β2 = 0.99, `P_i = 20`, `P_z = 40`.
    pub fn for_wavelength(wavelength: f64) -> Self {
        Self {
            step_size: 0.02 * wavelength,
            beta1: 0.9,
            beta2: 0.99,
            smoothing: 0.3 * wavelength,
            init_candidates: 20,
            iterations: 40,
            epsilon_guard: 1e-8,
            direction_mode: DirectionMode::UnitSphere,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| b > 0.0 && b <= 1.0;
        if !(unit(self.beta1) && unit(self.beta2)) {
            return Err(Error::config("beta1 and beta2 must lie in (0, 1]"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::config("step size must be positive"));
        }
        if !(self.smoothing > 0.0 && self.smoothing.is_finite()) {
            return Err(Error::config("smoothing radius must be positive"));
        }
        if !(self.epsilon_guard > 0.0) {
            return Err(Error::config("epsilon guard must be positive"));
        }
        if self.init_candidates == 0 {
            return Err(Error::config("at least one initial candidate is required"));
        }
        Ok(())
    }

    /// Pilot symbols one run consumes when each evaluation costs `cost` symbols.
    pub fn pilot_cost(&self, cost: usize) -> usize {
        cost * (self.init_candidates + 2 * self.iterations)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self { m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    /// Folds `g` into the moments and returns the step `α·m̂ / (√v̂ + ε)`.
    /// The caller adds it to ascend or subtracts it to descend.
    pub fn step(&mut self, g: &[f64], cfg: &ZoConfig) -> Vec<f64> {
        assert_eq!(g.len(), self.m.len(), "gradient dimension mismatch");
        self.t += 1;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        // with β = 1 the correction factor vanishes; fall back to the raw moment
        let corr = |b: f64| {
            let c = 1.0 - b.powi(self.t as i32);
            if c > 0.0 { c } else { 1.0 }
        };
        let (c1, c2) = (corr(b1), corr(b2));
        self.m
            .iter_mut()
            .zip(self.v.iter_mut())
            .zip(g)
            .map(|((m, v), &gi)| {
                *m = b1 * *m + (1.0 - b1) * gi;
                *v = b2 * *v + (1.0 - b2) * gi * gi;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                cfg.step_size * m_hat / (v_hat.sqrt() + cfg.epsilon_guard)
            })
            .collect()
    }
}

pub fn sample_direction<R: Rng + ?Sized>(dim: usize, mode: DirectionMode, rng: &mut R) -> Vec<f64> {
    assert!(dim >= 1, "direction dimension must be positive");
    match mode {
        DirectionMode::Coordinate => {
            let mut u = vec![0.0; dim];
            u[rng.random_range(0..dim)] = 1.0;
            u
        }
        DirectionMode::UnitSphere => loop {
            let u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-300 {
                break u.into_iter().map(|x| x / norm).collect();
            }
        },
    }
}

/// `(dim/μ)·(f_plus − f_minus)·u` with `dim = u.len()`.
pub fn zo_gradient(f_minus: f64, f_plus: f64, u: &[f64], smoothing: f64) -> Vec<f64> {
    let scale = u.len() as f64 / smoothing * (f_plus - f_minus);
    u.iter().map(|x| scale * x).collect()
}

/// Clamps every coordinate into `[−A/2, A/2]`.
pub fn boundary_project(positions: &PositionVector, region: &MovableRegion) -> PositionVector {
    let flat: Vec<f64> = positions.to_flat().into_iter().map(|v| region.clamp_coordinate(v)).collect();
    PositionVector::from_flat(&flat).expect("clamping keeps the vector well formed")
}

/// Scores every candidate and returns `(index, score)` of the best one; ties
/// go to the lowest index.
pub fn select_initial_position<F>(
    candidates: &[PositionVector],
    mut evaluate: F,
    sense: ObjectiveSense,
) -> Result<(usize, f64)>
where
    F: FnMut(&PositionVector) -> Result<f64>,
{
    if candidates.is_empty() {
        return Err(Error::usage("no initial candidates"));
    }
    let mut best = (0, evaluate(&candidates[0])?);
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let score = evaluate(c)?;
        if sense.improves(score, best.1) {
            best = (i, score);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Base point at which both probes of this iteration were measured.
    pub positions: PositionVector,
    pub probe_base: f64,
    pub probe_perturbed: f64,
    pub grad_norm: f64,
    pub budget_consumed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial_index: usize,
    pub initial_positions: PositionVector,
    pub initial_score: f64,
    pub records: Vec<IterationRecord>,
    /// Last iterate before spacing refinement.
    pub unrefined: PositionVector,
    pub final_positions: PositionVector,
}

impl Trajectory {
    /// `iteration,x_1,y_1,…,x_M,y_M,probe_base,probe_perturbed,grad_norm,budget_consumed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let m = self.initial_positions.num_antennas();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["iteration".to_string()];
        for i in 1..=m {
            header.push(format!("x_{i}"));
            header.push(format!("y_{i}"));
        }
        header.extend(["probe_base", "probe_perturbed", "grad_norm", "budget_consumed"].map(String::from));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.iteration.to_string()];
            row.extend(r.positions.to_flat().iter().map(|v| format!("{v:e}")));
            row.push(format!("{:e}", r.probe_base));
            row.push(format!("{:e}", r.probe_perturbed));
            row.push(format!("{:e}", r.grad_norm));
            row.push(r.budget_consumed.to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Every position the loop visited: the initial point and each base point.
    pub fn visited(&self) -> impl Iterator<Item = &PositionVector> {
        std::iter::once(&self.initial_positions)
            .chain(self.records.iter().map(|r| &r.positions))
            .chain(std::iter::once(&self.unrefined))
    }
}

fn check_budget<B: ClosedBox>(env: &B, cfg: &ZoConfig, cost: usize) -> Result<()> {
    let needed = cfg.pilot_cost(cost);
    let budget = env.budget();
    if needed > budget.remaining() {
        return Err(Error::BudgetExceeded {
            requested: needed,
            consumed: budget.consumed(),
            cap: budget.cap(),
        });
    }
    Ok(())
}

fn run_loop<B, F>(
    env: &mut B,
    constraints: &PlacementConstraints,
    num_antennas: usize,
    cfg: &ZoConfig,
    seed: u64,
    sense: ObjectiveSense,
    mut evaluate: F,
) -> Result<(PositionVector, Trajectory)>
where
    B: ClosedBox,
    F: FnMut(&mut B, &PositionVector) -> Result<f64>,
{
    let region = constraints.region;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<PositionVector> = (0..cfg.init_candidates)
        .map(|_| region.sample_positions(num_antennas, &mut rng))
        .collect();
    let (initial_index, initial_score) =
        select_initial_position(&candidates, |r| evaluate(env, r), sense)?;

    let dim = 2 * num_antennas;
    let mut x = candidates[initial_index].clone();
    let mut adam = AdamState::new(dim);
    let mut records = Vec::with_capacity(cfg.iterations);
    for iteration in 1..=cfg.iterations {
        let u = sample_direction(dim, cfg.direction_mode, &mut rng);
        let probe_base = evaluate(env, &x)?;
        let shifted: Vec<f64> = x
            .to_flat()
            .iter()
            .zip(&u)
            .map(|(xi, ui)| xi + cfg.smoothing * ui)
            .collect();
        // the probe itself must be a realizable placement
        let shifted = boundary_project(&PositionVector::from_flat(&shifted)?, &region);
        let probe_perturbed = evaluate(env, &shifted)?;
        let g = zo_gradient(probe_base, probe_perturbed, &u, cfg.smoothing);
        let grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let delta = adam.step(&g, cfg);
        let sign = match sense {
            ObjectiveSense::Maximize => 1.0,
            ObjectiveSense::Minimize => -1.0,
        };
        let next: Vec<f64> = x.to_flat().iter().zip(&delta).map(|(xi, di)| xi + sign * di).collect();
        records.push(IterationRecord {
            iteration,
            positions: x,
            probe_base,
            probe_perturbed,
            grad_norm,
            budget_consumed: env.budget().consumed(),
        });
        x = boundary_project(&PositionVector::from_flat(&next)?, &region);
    }

    let final_positions = refine_positions(&x, constraints.min_distance, &region, &mut rng)?;
    let trajectory = Trajectory {
        initial_index,
        initial_positions: candidates[initial_index].clone(),
        initial_score,
        records,
        unrefined: x,
        final_positions: final_positions.clone(),
    };
    Ok((final_positions, trajectory))
}

/// Single-user placement: maximize received pilot power `‖y(r)‖²`.
///
/// Consumes exactly `P_i + 2·P_z` pilot symbols.
pub fn optimize_single_user<B: ClosedBox>(
    env: &mut B,
    constraints: &PlacementConstraints,
    num_antennas: usize,
    cfg: &ZoConfig,
    seed: u64,
) -> Result<(PositionVector, Trajectory)> {
    cfg.validate()?;
    if env.num_users() != 1 {
        return Err(Error::usage(format!(
            "single-user optimization with {} users",
            env.num_users()
        )));
    }
    check_budget(env, cfg, 1)?;
    let noise = env.pilot_config().noise_power;
    run_loop(env, constraints, num_antennas, cfg, seed, ObjectiveSense::Maximize, |env, r| {
        Ok(env.received_power_probe(r)? / noise)
    })
}

/// Multi-user placement: minimize the estimated MMSE sum-MSE.
///
/// Every evaluation sends the environment's `T`-symbol pilot block, so a run
/// consumes exactly `T·(P_i + 2·P_z)` symbols.
pub fn optimize_multi_user<B: ClosedBox>(
    env: &mut B,
    constraints: &PlacementConstraints,
    num_antennas: usize,
    cfg: &ZoConfig,
    seed: u64,
) -> Result<(PositionVector, Trajectory)> {
    cfg.validate()?;
    let users = env.num_users();
    if users < 2 || users > num_antennas {
        return Err(Error::usage(format!(
            "multi-user optimization needs 2 <= K <= M, got K = {users}, M = {num_antennas}"
        )));
    }
    let block = env.pilot_block().clone();
    check_budget(env, cfg, block.len())?;
    let pilot = *env.pilot_config();
    run_loop(env, constraints, num_antennas, cfg, seed, ObjectiveSense::Minimize, |env, r| {
        let y = env.receive_pilots(r, &block)?;
        let h = ls_estimate(&y, &block, pilot.transmit_power)?;
        sum_mse_objective(&h, pilot.noise_power, pilot.transmit_power)
    })
}
