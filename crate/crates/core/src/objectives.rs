//! Receive combiners, SINR / rate / MSE reports and the two position
//! objectives: received power for a single user and the trace of the MMSE
//! error covariance for several users.
//!
//! Every formula works on the effective channel `G = √P_t·H`, so transmit
//! power enters the SINR. Rates are in bits/s/Hz.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `M×K` complex channel matrix; column `k` is the channel of user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(DMatrix<Complex64>);

impl ChannelMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Self {
        Self(entries)
    }

    pub fn from_fn(
        antennas: usize,
        users: usize,
        f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        Self(DMatrix::from_fn(antennas, users, f))
    }

    pub fn zeros(antennas: usize, users: usize) -> Self {
        Self(DMatrix::zeros(antennas, users))
    }

    /// Single-user channel from the per-antenna responses.
    pub fn from_column(h: &[Complex64]) -> Self {
        Self(DMatrix::from_column_slice(h.len(), 1, h))
    }

    pub fn num_antennas(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// `√P_t·H`.
    pub fn effective(&self, transmit_power: f64) -> DMatrix<Complex64> {
        self.0.scale(transmit_power.sqrt())
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinerKind {
    Mrc,
    Mmse,
    Custom,
}

/// `M×K` receive combining matrix `W`; column `k` detects user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    weights: DMatrix<Complex64>,
    kind: CombinerKind,
}

impl Combiner {
    pub fn custom(weights: DMatrix<Complex64>) -> Self {
        Self { weights, kind: CombinerKind::Custom }
    }

    pub fn weights(&self) -> &DMatrix<Complex64> {
        &self.weights
    }

    pub fn kind(&self) -> CombinerKind {
        self.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub sinr: Vec<f64>,
    pub rate: Vec<f64>,
    pub mse: Vec<f64>,
    pub sum_rate: f64,
}

/// `‖h‖²` for a single-user channel.
pub fn single_user_power_objective(h: &ChannelMatrix) -> Result<f64> {
    if h.num_users() != 1 {
        return Err(Error::usage(format!(
            "single-user objective called with K = {}",
            h.num_users()
        )));
    }
    Ok(h.frobenius_norm_sqr())
}

/// Maximum-ratio combiner `w = h/‖h‖`.
pub fn mrc_combiner(h: &ChannelMatrix) -> Result<Combiner> {
    let power = single_user_power_objective(h)?;
    if power == 0.0 {
        return Err(Error::DegenerateChannel("MRC of an all-zero channel".into()));
    }
    Ok(Combiner {
        weights: h.matrix().unscale(power.sqrt()),
        kind: CombinerKind::Mrc,
    })
}

/// Receive SNR `P_t·|w^H h|² / (σ²‖w‖²)` of a single-user combiner.
pub fn single_user_snr(h: &ChannelMatrix, w: &Combiner, noise_power: f64, transmit_power: f64) -> f64 {
    let w = w.weights.column(0);
    let h = h.matrix().column(0);
    let gain = w.dotc(&h).norm_sqr();
    transmit_power * gain / (noise_power * w.norm_squared())
}

/// `J = G G^H + σ² I_M`.
fn regularized_gram(g: &DMatrix<Complex64>, noise_power: f64) -> DMatrix<Complex64> {
    let m = g.nrows();
    let mut j = g * g.adjoint();
    for i in 0..m {
        j[(i, i)] += Complex64::new(noise_power, 0.0);
    }
    j
}

/// `J^{-1} G`; `J` is positive definite whenever σ² > 0.
fn solve_regularized(g: &DMatrix<Complex64>, noise_power: f64) -> DMatrix<Complex64> {
    regularized_gram(g, noise_power)
        .lu()
        .solve(g)
        .expect("G G^H + σ² I is nonsingular for σ² > 0")
}

/// Linear MMSE combiner `W = (G G^H + σ² I)^{-1} G`.
pub fn mmse_combiner(h: &ChannelMatrix, noise_power: f64, transmit_power: f64) -> Combiner {
    assert!(noise_power > 0.0, "MMSE combining needs a positive noise power");
    let g = h.effective(transmit_power);
    Combiner {
        weights: solve_regularized(&g, noise_power),
        kind: CombinerKind::Mmse,
    }
}

/// Per-user SINR, rate and MSE of combiner `W` on channel `H`.
///
/// For an MMSE combiner the MSE is `e_k = 1 − g_k^H J^{-1} g_k`, solved
/// independently of the weights; any other combiner gets the general
/// quadratic form `w^H J w − 2·Re(w^H g_k) + 1`.
pub fn rate_report(h: &ChannelMatrix, w: &Combiner, noise_power: f64, transmit_power: f64) -> RateReport {
    let g = h.effective(transmit_power);
    let weights = &w.weights;
    assert_eq!(weights.shape(), g.shape(), "combiner and channel dimensions differ");
    let users = g.ncols();

    let mut sinr = Vec::with_capacity(users);
    for k in 0..users {
        let wk = weights.column(k);
        let mut signal = 0.0;
        let mut interference = 0.0;
        for i in 0..users {
            let p = wk.dotc(&g.column(i)).norm_sqr();
            if i == k {
                signal = p;
            } else {
                interference += p;
            }
        }
        let noise = wk.norm_squared() * noise_power;
        sinr.push(signal / (interference + noise));
    }

    let mse = match w.kind {
        CombinerKind::Mmse => {
            let x = solve_regularized(&g, noise_power);
            (0..users)
                .map(|k| 1.0 - g.column(k).dotc(&x.column(k)).re)
                .collect()
        }
        _ => {
            let j = regularized_gram(&g, noise_power);
            (0..users)
                .map(|k| {
                    let wk = weights.column(k);
                    let quad = wk.dotc(&(&j * wk)).re;
                    quad - 2.0 * wk.dotc(&g.column(k)).re + 1.0
                })
                .collect()
        }
    };

    let rate: Vec<f64> = sinr.iter().map(|s| (1.0 + s).log2()).collect();
    let sum_rate = rate.iter().sum();
    RateReport { sinr, rate, mse, sum_rate }
}

/// Rate report of the MMSE combiner built from `H` itself.
pub fn mmse_rate_report(h: &ChannelMatrix, noise_power: f64, transmit_power: f64) -> RateReport {
    let w = mmse_combiner(h, noise_power, transmit_power);
    rate_report(h, &w, noise_power, transmit_power)
}

/// Sum rate with MMSE combining, the figure of merit reported for every method.
pub fn mmse_sum_rate(h: &ChannelMatrix, noise_power: f64, transmit_power: f64) -> f64 {
    mmse_rate_report(h, noise_power, transmit_power).sum_rate
}

/// `tr[(G^H G + σ² I_K)^{-1}]`, the multi-user position objective (to be minimized).
pub fn multi_user_mse_objective(h: &ChannelMatrix, noise_power: f64, transmit_power: f64) -> Result<f64> {
    let (m, k) = (h.num_antennas(), h.num_users());
    if k > m {
        return Err(Error::usage(format!("trace-MSE objective needs K <= M, got K = {k}, M = {m}")));
    }
    let g = h.effective(transmit_power);
    let mut gram = g.adjoint() * &g;
    for i in 0..k {
        gram[(i, i)] += Complex64::new(noise_power, 0.0);
    }
    let inv = gram
        .lu()
        .try_inverse()
        .expect("G^H G + σ² I is nonsingular for σ² > 0");
    Ok(inv.trace().re)
}

/// `σ²·tr[(G^H G + σ² I_K)^{-1}]`, which equals the MMSE sum-MSE `Σ_k e_k`.
pub fn sum_mse_objective(h: &ChannelMatrix, noise_power: f64, transmit_power: f64) -> Result<f64> {
    Ok(noise_power * multi_user_mse_objective(h, noise_power, transmit_power)?)
}
