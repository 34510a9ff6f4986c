//! Derivative-free placement of movable antennas at a multi-user base station.
//!
//! The crate simulates an uplink in which a base station with `M` movable
//! antennas serves `K` single-antenna users over a far-field multi-path
//! channel, and optimizes the antenna positions from pilot measurements alone.
//!
//! * [`scenario`]: channel geometry and random scenario generation.
//! * [`environment`]: the closed box that answers pilot queries and meters
//!   pilot consumption.
//! * [`objectives`]: combiners, rates, MSEs and the two position objectives.
//! * [`zo`]: zeroth-order Adam optimizer for one or several users.
//! * [`refine`]: minimum-spacing repair by grid projection.
//! * [`baselines`]: fixed array, random selection and a perfect-CSI swarm bound.
//! * [`experiment`]: seeded Monte Carlo sweeps, CSV output and SNR surfaces.

pub mod baselines;
pub mod environment;
pub mod error;
pub mod experiment;
pub mod objectives;
pub mod refine;
pub mod scenario;
pub mod seed;
pub mod zo;

pub use environment::{ClosedBox, Environment, PilotBlock, PilotBudget, PilotConfig};
pub use error::{Error, Result};
pub use objectives::{ChannelMatrix, Combiner, RateReport};
pub use refine::PlacementConstraints;
pub use scenario::{MovableRegion, Position2D, PositionVector, ScenarioGenerator, ScenarioParams};
pub use zo::{optimize_multi_user, optimize_single_user, Trajectory, ZoConfig};
