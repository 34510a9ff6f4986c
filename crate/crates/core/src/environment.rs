//! The closed box the optimizers talk to.
//!
//! An [`Environment`] owns the true scenario and answers pilot queries at
//! requested antenna positions: `Y = √P_t·H(r)·S + N`. Callers only ever see
//! received samples; the path angles and gains stay private. Every query is
//! charged against a [`PilotBudget`].

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::objectives::ChannelMatrix;
use crate::scenario::{channel_matrix, PositionVector, ScenarioParams};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Awgn,
    /// Measurements carry no noise; `σ²` still parameterizes the objectives.
    Noiseless,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotConfig {
    /// Watts.
    pub transmit_power: f64,
    /// Watts.
    pub noise_power: f64,
    /// Symbols per multi-user measurement block.
    pub pilot_length: usize,
    pub noise: NoiseMode,
}

impl PilotConfig {
    pub fn from_dbm(transmit_dbm: f64, noise_dbm: f64, pilot_length: usize) -> Result<Self> {
        let cfg = Self {
            transmit_power: dbm_to_watts(transmit_dbm),
            noise_power: dbm_to_watts(noise_dbm),
            pilot_length,
            noise: NoiseMode::Awgn,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn noiseless(mut self) -> Self {
        self.noise = NoiseMode::Noiseless;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.transmit_power.is_finite() && self.transmit_power > 0.0) {
            return Err(Error::config("transmit power must be positive"));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::config("noise power must be positive"));
        }
        if self.pilot_length == 0 {
            return Err(Error::config("pilot length must be at least 1"));
        }
        Ok(())
    }
}

/// `K×T` pilot symbols, one row per user, each row of unit average power.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBlock {
    symbols: DMatrix<Complex64>,
}

impl PilotBlock {
    pub fn new(symbols: DMatrix<Complex64>) -> Result<Self> {
        let t = symbols.ncols();
        if symbols.nrows() == 0 || t == 0 {
            return Err(Error::config("pilot block must be non-empty"));
        }
        for (k, row) in symbols.row_iter().enumerate() {
            let power = row.iter().map(|s| s.norm_sqr()).sum::<f64>() / t as f64;
            if (power - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!(
                    "pilot row {k} has average power {power}, expected 1"
                )));
            }
        }
        Ok(Self { symbols })
    }

    /// Rows `k` of a `T`-point DFT: `S[k, t] = exp(−j·2π·k·t/T)`. Needs `T ≥ K`.
    pub fn orthogonal(users: usize, length: usize) -> Result<Self> {
        if users == 0 || length < users {
            return Err(Error::config(format!(
                "orthogonal pilots need length >= users, got T = {length}, K = {users}"
            )));
        }
        let symbols = DMatrix::from_fn(users, length, |k, t| {
            Complex64::cis(-2.0 * std::f64::consts::PI * (k * t) as f64 / length as f64)
        });
        Ok(Self { symbols })
    }

    pub fn symbols(&self) -> &DMatrix<Complex64> {
        &self.symbols
    }

    pub fn num_users(&self) -> usize {
        self.symbols.nrows()
    }

    pub fn len(&self) -> usize {
        self.symbols.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// `M×T` received samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBatch {
    pub received: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PilotBudget {
    consumed: usize,
    cap: usize,
}

impl PilotBudget {
    pub fn new(cap: usize) -> Self {
        Self { consumed: 0, cap }
    }

    pub fn unlimited() -> Self {
        Self::new(usize::MAX)
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn remaining(&self) -> usize {
        self.cap - self.consumed
    }

    pub fn charge(&mut self, symbols: usize) -> Result<()> {
        if symbols > self.remaining() {
            return Err(Error::BudgetExceeded {
                requested: symbols,
                consumed: self.consumed,
                cap: self.cap,
            });
        }
        self.consumed += symbols;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRecord {
    pub query_index: usize,
    pub block_length: usize,
    pub consumed_total: usize,
}

/// Pilot-measurement interface seen by the optimizers and the RPS baseline.
///
/// Implementations must not leak channel parameters; the only channel
/// information that crosses this boundary is noisy received signal.
pub trait ClosedBox {
    fn num_users(&self) -> usize;

    fn pilot_config(&self) -> &PilotConfig;

    /// The block used for multi-user queries.
    fn pilot_block(&self) -> &PilotBlock;

    fn budget(&self) -> PilotBudget;

    fn receive_pilots(&mut self, positions: &PositionVector, block: &PilotBlock) -> Result<MeasurementBatch>;

    /// `‖y(r)‖²` for a single pilot symbol `s = 1`. Single-user only.
    fn received_power_probe(&mut self, positions: &PositionVector) -> Result<f64>;
}

/// Simulated base station: hides a [`ScenarioParams`] behind [`ClosedBox`].
#[derive(Debug)]
pub struct Environment {
    scenario: ScenarioParams,
    pilot: PilotConfig,
    block: PilotBlock,
    budget: PilotBudget,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    log: Vec<QueryRecord>,
}

impl Environment {
    /// `block` defaults to [`PilotBlock::orthogonal`] with `K` users and the
    /// configured pilot length.
    pub fn new(scenario: ScenarioParams, pilot: PilotConfig, budget_cap: usize, seed: u64) -> Result<Self> {
        pilot.validate()?;
        let block = PilotBlock::orthogonal(scenario.num_users(), pilot.pilot_length)?;
        Self::with_block(scenario, pilot, block, budget_cap, seed)
    }

    pub fn with_block(
        scenario: ScenarioParams,
        pilot: PilotConfig,
        block: PilotBlock,
        budget_cap: usize,
        seed: u64,
    ) -> Result<Self> {
        pilot.validate()?;
        if block.num_users() != scenario.num_users() {
            return Err(Error::config(format!(
                "pilot block has {} rows for {} users",
                block.num_users(),
                scenario.num_users()
            )));
        }
        Ok(Self {
            scenario,
            pilot,
            block,
            budget: PilotBudget::new(budget_cap),
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise: Normal::new(0.0, (pilot.noise_power / 2.0).sqrt()).expect("positive noise power"),
            log: Vec::new(),
        })
    }

    pub fn query_log(&self) -> &[QueryRecord] {
        &self.log
    }

    /// Budget audit trail: `query_index,block_length,consumed_total`.
    pub fn write_query_log<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["query_index", "block_length", "consumed_total"])?;
        for r in &self.log {
            w.serialize((r.query_index, r.block_length, r.consumed_total))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    fn charge(&mut self, symbols: usize) -> Result<()> {
        self.budget.charge(symbols)?;
        self.log.push(QueryRecord {
            query_index: self.log.len(),
            block_length: symbols,
            consumed_total: self.budget.consumed(),
        });
        Ok(())
    }

    fn measure(&mut self, positions: &PositionVector, symbols: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let h = channel_matrix(positions, &self.scenario);
        let mut y = h.effective(self.pilot.transmit_power) * symbols;
        if self.pilot.noise == NoiseMode::Awgn {
            for v in y.iter_mut() {
                *v += Complex64::new(self.noise.sample(&mut self.rng), self.noise.sample(&mut self.rng));
            }
        }
        y
    }
}

impl ClosedBox for Environment {
    fn num_users(&self) -> usize {
        self.scenario.num_users()
    }

    fn pilot_config(&self) -> &PilotConfig {
        &self.pilot
    }

    fn pilot_block(&self) -> &PilotBlock {
        &self.block
    }

    fn budget(&self) -> PilotBudget {
        self.budget
    }

    fn receive_pilots(&mut self, positions: &PositionVector, block: &PilotBlock) -> Result<MeasurementBatch> {
        if block.num_users() != self.scenario.num_users() {
            return Err(Error::usage(format!(
                "pilot block has {} rows for {} users",
                block.num_users(),
                self.scenario.num_users()
            )));
        }
        self.charge(block.len())?;
        Ok(MeasurementBatch { received: self.measure(positions, block.symbols()) })
    }

    fn received_power_probe(&mut self, positions: &PositionVector) -> Result<f64> {
        if self.scenario.num_users() != 1 {
            return Err(Error::usage(format!(
                "received-power probes need a single user, scenario has {}",
                self.scenario.num_users()
            )));
        }
        self.charge(1)?;
        let y = self.measure(positions, &DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)));
        Ok(y.norm_squared())
    }
}

/// Least-squares channel estimate `Ĥ = Y S^H (S S^H)^{-1} / √P_t`.
pub fn ls_estimate(y: &MeasurementBatch, block: &PilotBlock, transmit_power: f64) -> Result<ChannelMatrix> {
    let s = block.symbols();
    let (k, t) = s.shape();
    if y.received.ncols() != t {
        return Err(Error::usage(format!(
            "measurement has {} samples for a {t}-symbol pilot block",
            y.received.ncols()
        )));
    }
    if t < k {
        return Err(Error::SingularPilot { min_singular: 0.0 });
    }
    let sv = s.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(min > 1e-10 * max) {
        return Err(Error::SingularPilot { min_singular: min });
    }
    // (S S^H) X^H = S Y^H, with S S^H Hermitian
    let gram = s * s.adjoint();
    let rhs = s * y.received.adjoint();
    let xh = gram.lu().solve(&rhs).ok_or(Error::SingularPilot { min_singular: min })?;
    Ok(ChannelMatrix::new(xh.adjoint().unscale(transmit_power.sqrt())))
}
