//! Experiment configuration documents (TOML) and their resolution into the
//! concrete settings of one sweep point.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::PsoConfig;
use crate::environment::{dbm_to_watts, NoiseMode, PilotConfig};
use crate::error::{Error, Result};
use crate::refine::PlacementConstraints;
use crate::scenario::{CarrierConfig, MovableRegion, PathCount, ScenarioGenerator};
use crate::zo::{DirectionMode, ZoConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Zeroth-order position optimization from pilot measurements.
    Dfpo,
    Fpa,
    Rps,
    PsoUb,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Dfpo => "dfpo",
            Method::Fpa => "fpa",
            Method::Rps => "rps",
            Method::PsoUb => "pso_ub",
        }
    }

    /// Whether the method draws pilots from the `T_all` budget.
    pub fn is_budgeted(&self) -> bool {
        matches!(self, Method::Dfpo | Method::Rps)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Total pilot budget `T_all`.
    Pilots,
    PowerDbm,
    Paths,
    Antennas,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Pilots => "pilots",
            SweepAxis::PowerDbm => "power_dbm",
            SweepAxis::Paths => "paths",
            SweepAxis::Antennas => "antennas",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSettings {
    pub antennas: usize,
    pub users: usize,
    pub paths: usize,
    /// Side `A` of the movable region, in wavelengths.
    pub region_wavelengths: f64,
    pub min_distance_wavelengths: f64,
    pub carrier_hz: f64,
    pub transmit_power_dbm: f64,
    pub noise_power_dbm: f64,
    /// Pilot budget `T_all` of the budgeted methods.
    pub pilots: usize,
    /// Symbols per multi-user block; defaults to 1 for one user and `K + 1` otherwise.
    pub pilot_length: Option<usize>,
    pub distance_min_m: f64,
    pub distance_max_m: f64,
    pub pathloss_reference_db: f64,
    pub pathloss_exponent: f64,
    pub noiseless: bool,
}

impl Default for SystemSettings {
    fn default() -> Self {
        Self {
            antennas: 4,
            users: 3,
            paths: 70,
            region_wavelengths: 4.0,
            min_distance_wavelengths: 0.25,
            carrier_hz: 5e9,
            transmit_power_dbm: -5.0,
            noise_power_dbm: -90.0,
            pilots: 160,
            pilot_length: None,
            distance_min_m: 20.0,
            distance_max_m: 100.0,
            pathloss_reference_db: -40.0,
            pathloss_exponent: 2.8,
            noiseless: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSetting {
    Sphere,
    Coordinate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub step_size_wavelengths: f64,
    pub smoothing_wavelengths: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon_guard: f64,
    pub direction: DirectionSetting,
    /// Overrides the budget split when set.
    pub init_candidates: Option<usize>,
    pub iterations: Option<usize>,
    /// Share of `T_all` spent on initial candidates when no override is set.
    pub init_fraction: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            step_size_wavelengths: 0.02,
            smoothing_wavelengths: 0.3,
            beta1: 0.9,
            beta2: 0.99,
            epsilon_guard: 1e-8,
            direction: DirectionSetting::Sphere,
            init_candidates: None,
            iterations: None,
            init_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoSettings {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub iterations: usize,
    /// Defaults to a quarter of the region side.
    pub velocity_cap_wavelengths: Option<f64>,
}

impl Default for PsoSettings {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            iterations: 200,
            velocity_cap_wavelengths: None,
        }
    }
}

/// Per-user override, one `[[users]]` table per user in order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserOverride {
    pub paths: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub master_seed: u64,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub system: SystemSettings,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub pso: PsoSettings,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub users: Vec<UserOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Everything one (method, axis value, trial) run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    pub generator: ScenarioGenerator,
    pub pilot: PilotConfig,
    pub constraints: PlacementConstraints,
    pub num_antennas: usize,
    pub wavelength: f64,
    /// `T_all`.
    pub budget: usize,
    /// Pilot symbols per function evaluation: 1 for one user, `T` otherwise.
    pub evaluation_cost: usize,
    pub zo: ZoConfig,
    pub pso: PsoConfig,
    pub rps_candidates: usize,
}

fn whole(axis: SweepAxis, v: f64) -> Result<usize> {
    if v.fract() != 0.0 || v < 1.0 || !v.is_finite() {
        return Err(Error::config(format!("{} sweep value {v} must be a positive integer", axis.as_str())));
    }
    Ok(v as usize)
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| Error::Parse { path: path.to_owned(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config is always serializable")
    }

    /// FNV-1a hash of the canonical document. Trial indices are not part of it.
    pub fn fingerprint(&self) -> u64 {
        self.to_toml_string()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
    }

    /// Checks the document and every sweep point.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("at least one method is required"));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::config("sweep needs at least one axis value"));
        }
        if !self.users.is_empty() && self.users.len() != self.system.users {
            return Err(Error::config(format!(
                "{} [[users]] tables for {} users",
                self.users.len(),
                self.system.users
            )));
        }
        for &v in &self.sweep.values {
            self.setup(v)?;
        }
        Ok(())
    }

    /// Resolves the settings of sweep point `axis_value`.
    pub fn setup(&self, axis_value: f64) -> Result<TrialSetup> {
        let mut sys = self.system.clone();
        let axis = self.sweep.axis;
        match axis {
            SweepAxis::Pilots => sys.pilots = whole(axis, axis_value)?,
            SweepAxis::PowerDbm => {
                if !axis_value.is_finite() {
                    return Err(Error::config("power sweep values must be finite"));
                }
                sys.transmit_power_dbm = axis_value;
            }
            SweepAxis::Paths => sys.paths = whole(axis, axis_value)?,
            SweepAxis::Antennas => sys.antennas = whole(axis, axis_value)?,
        }
        if sys.antennas == 0 {
            return Err(Error::config("antennas must be at least 1"));
        }
        if sys.users == 0 {
            return Err(Error::config("users must be at least 1"));
        }
        if sys.users > 1 && sys.users > sys.antennas {
            return Err(Error::config(format!(
                "multi-user placement needs K <= M, got K = {}, M = {}",
                sys.users, sys.antennas
            )));
        }

        let carrier = CarrierConfig::new(sys.carrier_hz)?;
        let wavelength = carrier.wavelength();
        let paths = if self.users.is_empty() || axis == SweepAxis::Paths {
            PathCount::Uniform(sys.paths)
        } else {
            PathCount::PerUser(self.users.iter().map(|u| u.paths.unwrap_or(sys.paths)).collect())
        };
        let generator = ScenarioGenerator {
            num_users: sys.users,
            paths,
            distance_range: (sys.distance_min_m, sys.distance_max_m),
            pathloss_reference: 10f64.powf(sys.pathloss_reference_db / 10.0),
            pathloss_exponent: sys.pathloss_exponent,
            carrier,
        };
        generator.validate()?;

        let pilot_length = sys.pilot_length.unwrap_or(if sys.users == 1 { 1 } else { sys.users + 1 });
        if pilot_length < sys.users {
            return Err(Error::config(format!(
                "pilot length {pilot_length} is shorter than the number of users {}",
                sys.users
            )));
        }
        let pilot = PilotConfig {
            transmit_power: dbm_to_watts(sys.transmit_power_dbm),
            noise_power: dbm_to_watts(sys.noise_power_dbm),
            pilot_length,
            noise: if sys.noiseless { NoiseMode::Noiseless } else { NoiseMode::Awgn },
        };
        pilot.validate()?;

        let region = MovableRegion::with_side(sys.region_wavelengths * wavelength)?;
        let constraints = PlacementConstraints::new(region, sys.min_distance_wavelengths * wavelength)?;

        let cost = if sys.users == 1 { 1 } else { pilot_length };
        let budget = sys.pilots;
        let (init_candidates, iterations) = self.budget_split(budget, cost)?;
        let opt = &self.optimizer;
        let zo = ZoConfig {
            step_size: opt.step_size_wavelengths * wavelength,
            beta1: opt.beta1,
            beta2: opt.beta2,
            smoothing: opt.smoothing_wavelengths * wavelength,
            init_candidates,
            iterations,
            epsilon_guard: opt.epsilon_guard,
            direction_mode: match opt.direction {
                DirectionSetting::Sphere => DirectionMode::UnitSphere,
                DirectionSetting::Coordinate => DirectionMode::Coordinate,
            },
        };
        zo.validate()?;

        let p = &self.pso;
        let pso = PsoConfig {
            swarm_size: p.swarm_size,
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
            iterations: p.iterations,
            velocity_cap: p
                .velocity_cap_wavelengths
                .map_or(region.side() / 4.0, |v| v * wavelength),
        };
        pso.validate()?;

        Ok(TrialSetup {
            generator,
            pilot,
            constraints,
            num_antennas: sys.antennas,
            wavelength,
            budget,
            evaluation_cost: cost,
            zo,
            pso,
            rps_candidates: budget / cost,
        })
    }

    /// `(P_i, P_z)` for budget `T_all` when each evaluation costs `cost`
    /// symbols. Without overrides, `P_i = ⌈f·T_all/cost⌉` with `f` the
    /// initialization share, and the rest goes to iterations.
    fn budget_split(&self, budget: usize, cost: usize) -> Result<(usize, usize)> {
        let opt = &self.optimizer;
        if !(opt.init_fraction > 0.0 && opt.init_fraction <= 1.0) {
            return Err(Error::config("init_fraction must lie in (0, 1]"));
        }
        let evaluations = budget / cost;
        if evaluations == 0 {
            return Err(Error::config(format!(
                "pilot budget {budget} cannot pay for one {cost}-symbol evaluation"
            )));
        }
        let init = match opt.init_candidates {
            Some(p) => p,
            None => ((opt.init_fraction * budget as f64) / cost as f64).ceil() as usize,
        };
        let init = init.max(1);
        let iterations = match opt.iterations {
            Some(z) => z,
            None => evaluations.saturating_sub(init) / 2,
        };
        if cost * (init + 2 * iterations) > budget {
            return Err(Error::config(format!(
                "P_i = {init}, P_z = {iterations} need {} pilot symbols, budget is {budget}",
                cost * (init + 2 * iterations)
            )));
        }
        Ok((init, iterations))
    }
}
