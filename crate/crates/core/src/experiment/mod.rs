//! Experiment harness: TOML configs, seeded sweeps and SNR surfaces.

pub mod config;
pub mod runner;
pub mod surface;

pub use config::{ExperimentConfig, Method, SweepAxis, SweepSpec, TrialSetup};
pub use runner::{run_sweep, run_trial, ResultRow, ResultWriter, TrialOutcome, WORKERS_ENV};
pub use surface::{probe_snr, snr_surface, SnrSurface};
