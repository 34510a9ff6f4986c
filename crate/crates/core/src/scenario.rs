//! Far-field multi-path channel model for antennas that move inside a square
//! region at the base station, and a seeded generator of random multi-user
//! scenarios.
//!
//! Every user reaches the array through `L_k` paths. Moving an antenna from
//! the reference point to `r = (x, y)` changes the propagation distance of
//! path `l` by
//!
//! ```text
//! d(r; θ, φ) = x·cos θ·sin φ + y·sin θ
//! ```
//!
//! and the response of user `k` at `r` is `h_k(r) = p_k(r)^H μ_k`, where
//! `p_k(r)` holds the per-path phase factors `exp(+j·2π/λ·d)` and `μ_k` the
//! complex path gains. The Hermitian transpose flips the sign, so the response
//! itself is `Σ_l b_l·exp(−j·2π/λ·d_l)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::ChannelMatrix;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierConfig {
    frequency_hz: f64,
}

impl CarrierConfig {
    pub fn new(frequency_hz: f64) -> Result<Self> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(Error::config(format!(
                "carrier frequency must be positive, got {frequency_hz}"
            )));
        }
        Ok(Self { frequency_hz })
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }
}

impl Default for CarrierConfig {
    /// 5 GHz.
    fn default() -> Self {
        Self { frequency_hz: 5e9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub const ORIGIN: Position2D = Position2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// The square `[−A/2, A/2]²` each antenna may occupy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovableRegion {
    half_width: f64,
}

impl MovableRegion {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::config(format!(
                "region half width must be positive, got {half_width}"
            )));
        }
        Ok(Self { half_width })
    }

    /// Square of side `side` centered at the reference point.
    pub fn with_side(side: f64) -> Result<Self> {
        Self::new(side / 2.0)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, p: &Position2D) -> bool {
        p.x.abs() <= self.half_width && p.y.abs() <= self.half_width
    }

    pub fn clamp_coordinate(&self, v: f64) -> f64 {
        v.clamp(-self.half_width, self.half_width)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Position2D {
        let dist = Uniform::new_inclusive(-self.half_width, self.half_width)
            .expect("half width is positive and finite");
        Position2D::new(dist.sample(rng), dist.sample(rng))
    }

    pub fn sample_positions<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> PositionVector {
        PositionVector((0..count).map(|_| self.sample(rng)).collect())
    }
}

/// Positions of all `M` antennas; flattened as `[x_1, y_1, …, x_M, y_M]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionVector(Vec<Position2D>);

impl PositionVector {
    pub fn new(positions: Vec<Position2D>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::config("a position vector needs at least one antenna"));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::config(format!("antenna {i} has a non-finite position")));
        }
        Ok(Self(positions))
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::config(format!(
                "flattened position vector has odd length {}",
                flat.len()
            )));
        }
        Self::new(
            flat.chunks_exact(2)
                .map(|c| Position2D::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.0.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub fn num_antennas(&self) -> usize {
        self.0.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.0.len()
    }

    pub fn positions(&self) -> &[Position2D] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Position2D> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Position2D> {
        self.0
    }

    /// Smallest distance between two distinct antennas, `+∞` for a single antenna.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.0.iter().enumerate() {
            for b in &self.0[i + 1..] {
                best = best.min(a.distance(b));
            }
        }
        best
    }
}

impl std::ops::Index<usize> for PositionVector {
    type Output = Position2D;

    fn index(&self, i: usize) -> &Position2D {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    /// Elevation angle of arrival θ in radians.
    pub elevation: f64,
    /// Azimuth angle of arrival φ in radians.
    pub azimuth: f64,
    pub gain: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserChannelParams {
    pub paths: Vec<PathComponent>,
    /// Distance from the user to the base station in meters.
    pub distance: f64,
}

impl UserChannelParams {
    pub fn new(paths: Vec<PathComponent>, distance: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::config("a user needs at least one path"));
        }
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::config(format!("user distance must be positive, got {distance}")));
        }
        for (l, p) in paths.iter().enumerate() {
            let in_range = |a: f64| (-FRAC_PI_2..=FRAC_PI_2).contains(&a);
            if !in_range(p.elevation) || !in_range(p.azimuth) {
                return Err(Error::config(format!("path {l} has an angle outside [-pi/2, pi/2]")));
            }
        }
        Ok(Self { paths, distance })
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// `Σ_l |b_l|²`, the instantaneous power of the path response vector.
    pub fn path_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub users: Vec<UserChannelParams>,
    pub carrier: CarrierConfig,
    /// Linear path-loss power gain at 1 m.
    pub pathloss_reference: f64,
    pub pathloss_exponent: f64,
    pub seed: u64,
}

impl ScenarioParams {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn wavelength(&self) -> f64 {
        self.carrier.wavelength()
    }

    /// Expected channel gain `ρ·d^−exponent` of a user at `distance`.
    pub fn expected_gain(&self, distance: f64) -> f64 {
        self.pathloss_reference * distance.powf(-self.pathloss_exponent)
    }
}

/// Change in propagation distance of a path with angles `(θ, φ)` when an
/// antenna moves from the reference point to `pos`.
pub fn path_distance_delta(pos: Position2D, elevation: f64, azimuth: f64) -> f64 {
    pos.x * elevation.cos() * azimuth.sin() + pos.y * elevation.sin()
}

pub fn phase_variation_vector(
    pos: Position2D,
    user: &UserChannelParams,
    wavelength: f64,
) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    user.paths
        .iter()
        .map(|p| Complex64::cis(k * path_distance_delta(pos, p.elevation, p.azimuth)))
        .collect()
}

/// `p_k(pos)^H μ_k`.
pub fn channel_response(pos: Position2D, user: &UserChannelParams, wavelength: f64) -> Complex64 {
    let k = 2.0 * PI / wavelength;
    user.paths
        .iter()
        .map(|p| p.gain * Complex64::cis(-k * path_distance_delta(pos, p.elevation, p.azimuth)))
        .sum()
}

/// `M×K` matrix whose column `k` is the response of user `k` at every antenna.
pub fn channel_matrix(positions: &PositionVector, scenario: &ScenarioParams) -> ChannelMatrix {
    let wavelength = scenario.wavelength();
    ChannelMatrix::from_fn(positions.num_antennas(), scenario.num_users(), |m, k| {
        channel_response(positions[m], &scenario.users[k], wavelength)
    })
}

/// Per-path wavenumber components of a scenario, for evaluating many channel
/// matrices of the same users.
#[derive(Debug, Clone)]
pub struct PathTable {
    // (k·cos θ·sin φ, k·sin θ, b) per path, one list per user
    users: Vec<Vec<(f64, f64, Complex64)>>,
}

impl PathTable {
    pub fn new(scenario: &ScenarioParams) -> Self {
        let k = 2.0 * PI / scenario.wavelength();
        let users = scenario
            .users
            .iter()
            .map(|u| {
                u.paths
                    .iter()
                    .map(|p| (k * p.elevation.cos() * p.azimuth.sin(), k * p.elevation.sin(), p.gain))
                    .collect()
            })
            .collect();
        Self { users }
    }

    pub fn response(&self, user: usize, pos: Position2D) -> Complex64 {
        self.users[user]
            .iter()
            .map(|&(kx, ky, b)| b * Complex64::cis(-(kx * pos.x + ky * pos.y)))
            .sum()
    }

    /// Same as [`channel_matrix`].
    pub fn channel_matrix(&self, positions: &PositionVector) -> ChannelMatrix {
        ChannelMatrix::from_fn(positions.num_antennas(), self.users.len(), |m, k| {
            self.response(k, positions[m])
        })
    }
}

/// How many paths each generated user gets.
#[derive(Debug, Clone, PartialEq)]
pub enum PathCount {
    Uniform(usize),
    PerUser(Vec<usize>),
}

/// Settings for drawing random scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGenerator {
    pub num_users: usize,
    pub paths: PathCount,
    /// Uniform user distance range in meters; `lo == hi` pins every user.
    pub distance_range: (f64, f64),
    pub pathloss_reference: f64,
    pub pathloss_exponent: f64,
    pub carrier: CarrierConfig,
}

impl Default for ScenarioGenerator {
    fn default() -> Self {
        Self {
            num_users: 3,
            paths: PathCount::Uniform(70),
            distance_range: (20.0, 100.0),
            pathloss_reference: 10f64.powf(-40.0 / 10.0),
            pathloss_exponent: 2.8,
            carrier: CarrierConfig::default(),
        }
    }
}

impl ScenarioGenerator {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::config("scenario needs at least one user"));
        }
        match &self.paths {
            PathCount::Uniform(0) => return Err(Error::config("path count must be at least 1")),
            PathCount::PerUser(v) if v.len() != self.num_users => {
                return Err(Error::config(format!(
                    "{} per-user path counts given for {} users",
                    v.len(),
                    self.num_users
                )))
            }
            PathCount::PerUser(v) if v.contains(&0) => {
                return Err(Error::config("path count must be at least 1"))
            }
            _ => {}
        }
        let (lo, hi) = self.distance_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::config(format!("invalid distance range [{lo}, {hi}]")));
        }
        if !(self.pathloss_reference.is_finite() && self.pathloss_reference > 0.0) {
            return Err(Error::config("path-loss reference gain must be positive"));
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent > 0.0) {
            return Err(Error::config("path-loss exponent must be positive"));
        }
        Ok(())
    }

    fn paths_for(&self, user: usize) -> usize {
        match &self.paths {
            PathCount::Uniform(l) => *l,
            PathCount::PerUser(v) => v[user],
        }
    }

    /// Draws a scenario: user distances uniform on the configured range, AoAs
    /// i.i.d. uniform on `[−π/2, π/2]`, and gains `CN(0, ρ·d_k^−exponent / L_k)`.
    pub fn generate(&self, seed: u64) -> Result<ScenarioParams> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.distance_range;
        let angle = Uniform::new_inclusive(-FRAC_PI_2, FRAC_PI_2).expect("finite bounds");
        let mut users = Vec::with_capacity(self.num_users);
        for k in 0..self.num_users {
            let distance = if lo == hi { lo } else { rng.random_range(lo..=hi) };
            let num_paths = self.paths_for(k);
            let gain = self.pathloss_reference * distance.powf(-self.pathloss_exponent);
            // per-component std of CN(0, gain / L)
            let component = Normal::new(0.0, (gain / (2.0 * num_paths as f64)).sqrt())
                .expect("finite positive std");
            let paths = (0..num_paths)
                .map(|_| PathComponent {
                    elevation: angle.sample(&mut rng),
                    azimuth: angle.sample(&mut rng),
                    gain: Complex64::new(component.sample(&mut rng), component.sample(&mut rng)),
                })
                .collect();
            users.push(UserChannelParams { paths, distance });
        }
        Ok(ScenarioParams {
            users,
            carrier: self.carrier,
            pathloss_reference: self.pathloss_reference,
            pathloss_exponent: self.pathloss_exponent,
            seed,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PathDoc {
    theta: f64,
    phi: f64,
    b_re: f64,
    b_im: f64,
}

#[derive(Serialize, Deserialize)]
struct UserDoc {
    d_k: f64,
    #[serde(rename = "L_k")]
    l_k: usize,
    paths: Vec<PathDoc>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioDoc {
    seed: u64,
    #[serde(rename = "K")]
    k: usize,
    rho: f64,
    exponent: f64,
    carrier_hz: f64,
    users: Vec<UserDoc>,
}

impl ScenarioParams {
    /// TOML document with every parameter needed to rebuild the scenario.
    pub fn to_toml_string(&self) -> String {
        let doc = ScenarioDoc {
            seed: self.seed,
            k: self.users.len(),
            rho: self.pathloss_reference,
            exponent: self.pathloss_exponent,
            carrier_hz: self.carrier.frequency_hz(),
            users: self
                .users
                .iter()
                .map(|u| UserDoc {
                    d_k: u.distance,
                    l_k: u.paths.len(),
                    paths: u
                        .paths
                        .iter()
                        .map(|p| PathDoc {
                            theta: p.elevation,
                            phi: p.azimuth,
                            b_re: p.gain.re,
                            b_im: p.gain.im,
                        })
                        .collect(),
                })
                .collect(),
        };
        toml::to_string(&doc).expect("scenario document is always serializable")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: ScenarioDoc =
            toml::from_str(text).map_err(|e| Error::config(format!("scenario document: {e}")))?;
        if doc.k != doc.users.len() {
            return Err(Error::config(format!(
                "scenario declares K = {} but lists {} users",
                doc.k,
                doc.users.len()
            )));
        }
        if doc.k == 0 {
            return Err(Error::config("scenario needs at least one user"));
        }
        let users = doc
            .users
            .into_iter()
            .enumerate()
            .map(|(k, u)| {
                if u.l_k != u.paths.len() {
                    return Err(Error::config(format!(
                        "user {k} declares L_k = {} but lists {} paths",
                        u.l_k,
                        u.paths.len()
                    )));
                }
                let paths = u
                    .paths
                    .into_iter()
                    .map(|p| PathComponent {
                        elevation: p.theta,
                        azimuth: p.phi,
                        gain: Complex64::new(p.b_re, p.b_im),
                    })
                    .collect();
                UserChannelParams::new(paths, u.d_k)
            })
            .collect::<Result<Vec<_>>>()?;
        if !(doc.rho > 0.0 && doc.exponent > 0.0) {
            return Err(Error::config("rho and exponent must be positive"));
        }
        Ok(ScenarioParams {
            users,
            carrier: CarrierConfig::new(doc.carrier_hz)?,
            pathloss_reference: doc.rho,
            pathloss_exponent: doc.exponent,
            seed: doc.seed,
        })
    }
}
