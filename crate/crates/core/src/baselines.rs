//! Comparison schemes: a fixed half-wavelength planar array, random position
//! selection under the same pilot budget, and a particle swarm run with full
//! knowledge of the true channel (an upper bound no practical method sees).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::environment::{ls_estimate, ClosedBox};
use crate::error::{Error, Result};
use crate::objectives::{mmse_sum_rate, single_user_power_objective, sum_mse_objective};
use crate::refine::{refine_positions, PlacementConstraints};
use crate::scenario::{MovableRegion, PathTable, Position2D, PositionVector, ScenarioParams};

/// `M = rows × cols` with `rows ≤ cols` and `rows` as large as possible.
fn most_square_factors(m: usize) -> (usize, usize) {
    let mut rows = (m as f64).sqrt().floor() as usize;
    while rows > 1 && m % rows != 0 {
        rows -= 1;
    }
    (rows.max(1), m / rows.max(1))
}

fn grid_layout(num_antennas: usize, cols: usize, spacing: f64) -> Vec<Position2D> {
    let rows = num_antennas.div_ceil(cols);
    (0..num_antennas)
        .map(|n| {
            let (i, j) = (n / cols, n % cols);
            // a partial last row is centered on its own
            let in_row = if i + 1 == rows { num_antennas - i * cols } else { cols };
            Position2D::new(
                (j as f64 - (in_row - 1) as f64 / 2.0) * spacing,
                (i as f64 - (rows - 1) as f64 / 2.0) * spacing,
            )
        })
        .collect()
}

/// Uniform planar array with `λ/2` spacing, centered on the region.
///
/// Uses the most-square factorization `M = rows × cols`. When that array does
/// not fit (a long line for prime `M`), falls back to `⌈√M⌉` columns with a
/// partially filled last row.
pub fn fpa_layout(num_antennas: usize, wavelength: f64, region: &MovableRegion) -> Result<PositionVector> {
    if num_antennas == 0 {
        return Err(Error::config("array needs at least one antenna"));
    }
    let spacing = wavelength / 2.0;
    let (_, cols) = most_square_factors(num_antennas);
    let fits = |ps: &[Position2D]| ps.iter().all(|p| region.contains(p));
    let mut positions = grid_layout(num_antennas, cols, spacing);
    if !fits(&positions) {
        let square = (num_antennas as f64).sqrt().ceil() as usize;
        positions = grid_layout(num_antennas, square, spacing);
        if !fits(&positions) {
            return Err(Error::config(format!(
                "{num_antennas} half-wavelength-spaced antennas do not fit a region of side {}",
                region.side()
            )));
        }
    }
    PositionVector::new(positions)
}

/// Random position selection: draws `n_candidates` feasible placements,
/// estimates the channel of each from one pilot block, and keeps the one with
/// the highest estimated MMSE sum rate. Spends `T` symbols per candidate.
pub fn random_position_selection<B: ClosedBox>(
    env: &mut B,
    constraints: &PlacementConstraints,
    num_antennas: usize,
    n_candidates: usize,
    seed: u64,
) -> Result<PositionVector> {
    if n_candidates == 0 {
        return Err(Error::config("random position selection needs at least one candidate"));
    }
    let block = env.pilot_block().clone();
    let budget = env.budget();
    let needed = n_candidates * block.len();
    if needed > budget.remaining() {
        return Err(Error::BudgetExceeded { requested: needed, consumed: budget.consumed(), cap: budget.cap() });
    }
    let pilot = *env.pilot_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(PositionVector, f64)> = None;
    for _ in 0..n_candidates {
        let raw = constraints.region.sample_positions(num_antennas, &mut rng);
        let candidate = refine_positions(&raw, constraints.min_distance, &constraints.region, &mut rng)?;
        let y = env.receive_pilots(&candidate, &block)?;
        let h = ls_estimate(&y, &block, pilot.transmit_power)?;
        let rate = mmse_sum_rate(&h, pilot.noise_power, pilot.transmit_power);
        if best.as_ref().is_none_or(|(_, r)| rate > *r) {
            best = Some((candidate, rate));
        }
    }
    Ok(best.expect("at least one candidate").0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub iterations: usize,
    /// Per-coordinate speed limit in meters.
    pub velocity_cap: f64,
}

impl PsoConfig {
    /// Swarm of 50, w = 0.72, c1 = c2 = 1.49, 200 iterations, speed cap `A/4`.
    pub fn for_region(region: &MovableRegion) -> Self {
        Self {
            swarm_size: 50,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            iterations: 200,
            velocity_cap: region.side() / 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::config("swarm size must be at least 1"));
        }
        let coeffs = [self.inertia, self.cognitive, self.social, self.velocity_cap];
        if coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::config("PSO coefficients must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Global-best particle swarm minimization over the box `[−hw, hw]^dim`.
///
/// Particles start uniformly in the box at rest; velocities are clamped to
/// the cap and positions to the box after every move.
pub fn pso_minimize<F, R>(dim: usize, half_width: f64, cfg: &PsoConfig, objective: F, rng: &mut R) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let mut xs: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| (0..dim).map(|_| rng.random_range(-half_width..=half_width)).collect())
        .collect();
    let mut vs = vec![vec![0.0; dim]; cfg.swarm_size];
    let mut best_x = xs.clone();
    let mut best_f: Vec<f64> = xs.iter().map(|x| objective(x)).collect();
    let mut g = 0;
    for i in 1..cfg.swarm_size {
        if best_f[i] < best_f[g] {
            g = i;
        }
    }
    let mut global_x = best_x[g].clone();
    let mut global_f = best_f[g];

    for _ in 0..cfg.iterations {
        for i in 0..cfg.swarm_size {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = cfg.inertia * vs[i][d]
                    + cfg.cognitive * r1 * (best_x[i][d] - xs[i][d])
                    + cfg.social * r2 * (global_x[d] - xs[i][d]);
                vs[i][d] = v.clamp(-cfg.velocity_cap, cfg.velocity_cap);
                xs[i][d] = (xs[i][d] + vs[i][d]).clamp(-half_width, half_width);
            }
            let f = objective(&xs[i]);
            if f < best_f[i] {
                best_f[i] = f;
                best_x[i].clone_from(&xs[i]);
            }
        }
        // the global best is refreshed once per sweep of the swarm
        for i in 0..cfg.swarm_size {
            if best_f[i] < global_f {
                global_f = best_f[i];
                global_x.clone_from(&best_x[i]);
            }
        }
    }
    (global_x, global_f)
}

/// Objective evaluated on the true channel by [`pso_upper_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrueObjective {
    /// Maximize `‖h‖²`.
    SingleUserPower,
    /// Minimize `σ²·tr[(GᴴG + σ²I)^{-1}]`.
    SumMse { noise_power: f64, transmit_power: f64 },
}

/// Particle swarm placement with perfect channel knowledge, followed by the
/// usual spacing refinement.
pub fn pso_upper_bound(
    scenario: &ScenarioParams,
    constraints: &PlacementConstraints,
    num_antennas: usize,
    cfg: &PsoConfig,
    objective: TrueObjective,
    seed: u64,
) -> Result<PositionVector> {
    cfg.validate()?;
    if let TrueObjective::SumMse { .. } = objective {
        if scenario.num_users() > num_antennas {
            return Err(Error::usage("trace-MSE objective needs K <= M"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = PathTable::new(scenario);
    let cost = |flat: &[f64]| -> f64 {
        let r = PositionVector::from_flat(flat).expect("swarm keeps 2M finite coordinates");
        let h = table.channel_matrix(&r);
        match objective {
            TrueObjective::SingleUserPower => -single_user_power_objective(&h).expect("single user"),
            TrueObjective::SumMse { noise_power, transmit_power } => {
                sum_mse_objective(&h, noise_power, transmit_power).expect("K <= M checked above")
            }
        }
    };
    let (best, _) = pso_minimize(2 * num_antennas, constraints.region.half_width(), cfg, cost, &mut rng);
    let raw = PositionVector::from_flat(&best)?;
    refine_positions(&raw, constraints.min_distance, &constraints.region, &mut rng)
}
