//! Independent oracles. Nothing here calls into the library's numerics: the
//! linear algebra is plain Gaussian elimination on nested vectors and the
//! channel is evaluated term by term from the angle definitions.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use dfpo::scenario::{PathComponent, Position2D, ScenarioParams, UserChannelParams};

pub type Mat = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cn<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(s * re, s * im)
}

pub fn random_mat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    (0..rows).map(|_| (0..cols).map(|_| cn(rng, 1.0)).collect()).collect()
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![c(0.0, 0.0); cols]; rows]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn adjoint(a: &Mat) -> Mat {
    let (r, k) = (a.len(), a[0].len());
    (0..k).map(|j| (0..r).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    assert_eq!(a[0].len(), k);
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut s = c(0.0, 0.0);
            for l in 0..k {
                s += a[i][l] * b[l][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn scale(a: &Mat, s: f64) -> Mat {
    a.iter().map(|row| row.iter().map(|v| v * s).collect()).collect()
}

pub fn add_diag(a: &Mat, s: f64) -> Mat {
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += s;
    }
    out
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let mut a = a.clone();
    let mut b = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        assert!(p.norm() > 1e-300, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / p;
            if f == c(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= f * t;
            }
            for k in 0..m {
                let t = b[col][k];
                b[row][k] -= f * t;
            }
        }
    }
    let mut x = zeros(n, m);
    for row in (0..n).rev() {
        for k in 0..m {
            let mut s = b[row][k];
            for j in row + 1..n {
                s -= a[row][j] * x[j][k];
            }
            x[row][k] = s / a[row][row];
        }
    }
    x
}

pub fn inverse(a: &Mat) -> Mat {
    solve(a, &identity(a.len()))
}

pub fn trace(a: &Mat) -> Complex64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn column(a: &Mat, k: usize) -> Vec<Complex64> {
    a.iter().map(|row| row[k]).collect()
}

pub fn frob_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

pub fn to_nalgebra(a: &Mat) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(a.len(), a[0].len(), |i, j| a[i][j])
}

pub fn from_nalgebra(a: &nalgebra::DMatrix<Complex64>) -> Mat {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

/// MMSE quantities straight from the definitions: `J = GG^H + σ²I`,
/// `W = J^{-1}G`, SINR of user `k` from its signal and interference-plus-noise
/// powers, and `e_k = 1 − g_k^H J^{-1} g_k`.
pub struct MmseOracle {
    pub sinr: Vec<f64>,
    pub mse: Vec<f64>,
}

pub fn mmse_oracle(h: &Mat, noise: f64, pt: f64) -> MmseOracle {
    let g = scale(h, pt.sqrt());
    let (m, k) = (g.len(), g[0].len());
    let j = add_diag(&mul(&g, &adjoint(&g)), noise);
    let w = solve(&j, &g);
    let mut sinr = Vec::with_capacity(k);
    let mut mse = Vec::with_capacity(k);
    for u in 0..k {
        let wk = column(&w, u);
        let inner = |v: &[Complex64]| -> Complex64 { (0..m).map(|i| wk[i].conj() * v[i]).sum() };
        let signal = inner(&column(&g, u)).norm_sqr();
        let interference: f64 = (0..k).filter(|&i| i != u).map(|i| inner(&column(&g, i)).norm_sqr()).sum();
        let wn: f64 = wk.iter().map(|v| v.norm_sqr()).sum();
        sinr.push(signal / (interference + noise * wn));
        let gk = column(&g, u);
        let jg = solve(&j, &gk.iter().map(|&v| vec![v]).collect());
        let q: Complex64 = (0..m).map(|i| gk[i].conj() * jg[i][0]).sum();
        mse.push(1.0 - q.re);
    }
    MmseOracle { sinr, mse }
}

/// Response of one user at `pos`, term by term: the conjugate of the phase
/// vector `exp(+j·2π/λ·Δ)` times the gains.
pub fn response(pos: Position2D, user: &UserChannelParams, wavelength: f64) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for p in &user.paths {
        let delta = pos.x * p.elevation.cos() * p.azimuth.sin() + pos.y * p.elevation.sin();
        let phase = 2.0 * PI / wavelength * delta;
        let p_l = c(phase.cos(), phase.sin());
        s += p_l.conj() * p.gain;
    }
    s
}

pub fn channel(positions: &[Position2D], scenario: &ScenarioParams) -> Mat {
    let lambda = scenario.wavelength();
    positions
        .iter()
        .map(|&p| scenario.users.iter().map(|u| response(p, u, lambda)).collect())
        .collect()
}

pub fn user(paths: &[(f64, f64, Complex64)], distance: f64) -> UserChannelParams {
    UserChannelParams::new(
        paths
            .iter()
            .map(|&(elevation, azimuth, gain)| PathComponent { elevation, azimuth, gain })
            .collect(),
        distance,
    )
    .unwrap()
}

/// Central finite-difference gradient.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Maximum of `f` over an inclusive `n×n` grid on `[−hw, hw]²`, with its location.
pub fn grid_max<F: Fn(f64, f64) -> f64>(f: F, hw: f64, n: usize) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let x = -hw + 2.0 * hw * i as f64 / (n - 1) as f64;
            let y = -hw + 2.0 * hw * j as f64 / (n - 1) as f64;
            let v = f(x, y);
            if v > best.0 {
                best = (v, x, y);
            }
        }
    }
    best
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
