//! The twelve acceptance criteria, each at its stated tolerance and time
//! limit. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! fails.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dfpo::environment::ls_estimate;
use dfpo::experiment::runner::{run_sweep_with_workers, run_trial_detailed, trial_scenario, worker_count};
use dfpo::experiment::{probe_snr, snr_surface, ExperimentConfig, Method, ResultRow};
use dfpo::objectives::{
    mmse_rate_report, mmse_sum_rate, mrc_combiner, single_user_snr, sum_mse_objective,
};
use dfpo::refine::refine_positions;
use dfpo::scenario::{CarrierConfig, PathCount, PathTable, ScenarioGenerator, ScenarioParams};
use dfpo::seed::{derive_seed, Stream};
use dfpo::zo::{sample_direction, zo_gradient, DirectionMode};
use dfpo::{
    optimize_single_user, ChannelMatrix, ClosedBox, Combiner, Environment, MovableRegion, PilotBlock, PilotConfig,
    PlacementConstraints, Position2D, PositionVector, ZoConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn lambda() -> f64 {
    CarrierConfig::default().wavelength()
}

fn region() -> MovableRegion {
    MovableRegion::with_side(4.0 * lambda()).unwrap()
}

fn constraints() -> PlacementConstraints {
    PlacementConstraints::new(region(), lambda() / 4.0).unwrap()
}

fn channel(a: &common::Mat) -> ChannelMatrix {
    ChannelMatrix::new(common::to_nalgebra(a))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (common::Mat, f64, f64) {
    let m = rng.random_range(1..=8);
    let k = rng.random_range(1..=m);
    let h = common::random_mat(rng, m, k);
    let noise = 10f64.powf(rng.random_range(-2.0..0.5));
    let pt = 10f64.powf(rng.random_range(-1.0..0.5));
    (h, noise, pt)
}

fn rate_mse_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (h, noise, pt) = random_instance(&mut rng);
        let report = mmse_rate_report(&channel(&h), noise, pt);
        let oracle = common::mmse_oracle(&h, noise, pt);
        for (r, e) in report.rate.iter().zip(&oracle.mse) {
            worst = worst.max((r - (1.0 / e).log2()).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max |R_k - log2(1/e_k)| = {worst:.2e} over 1000 instances"))
}

fn sum_mse_trace_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (h, noise, pt) = random_instance(&mut rng);
        let k = h[0].len() as f64;
        let g = common::scale(&h, pt.sqrt());
        let inv = common::inverse(&common::add_diag(&common::mul(&common::adjoint(&g), &g), noise));
        let trace = noise * common::trace(&inv).re;
        let report: f64 = mmse_rate_report(&channel(&h), noise, pt).mse.iter().sum();
        let oracle: f64 = common::mmse_oracle(&h, noise, pt).mse.iter().sum();
        let lib_trace = sum_mse_objective(&channel(&h), noise, pt).unwrap();
        for gap in [(report - trace).abs(), (oracle - lib_trace).abs()] {
            worst = worst.max(gap / k);
        }
    }
    outcome(worst <= 1e-9, format!("max |sum e_k - trace form| / K = {worst:.2e} over 1000 instances"))
}

fn mrc_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_rel, mut beaten) = (0.0f64, 0);
    for _ in 0..1000 {
        let m = rng.random_range(1..=8);
        let h = common::random_mat(&mut rng, m, 1);
        let (noise, pt) = (10f64.powf(rng.random_range(-2.0..1.0)), 10f64.powf(rng.random_range(-1.0..1.0)));
        let hc = channel(&h);
        let mrc = single_user_snr(&hc, &mrc_combiner(&hc).unwrap(), noise, pt);
        let norm: f64 = h.iter().map(|r| r[0].norm_sqr()).sum();
        let bound = pt * norm / noise;
        worst_rel = worst_rel.max((mrc - bound).abs() / bound);
        for _ in 0..100 {
            let w = Combiner::custom(common::to_nalgebra(&common::random_mat(&mut rng, m, 1)));
            if single_user_snr(&hc, &w, noise, pt) > mrc * (1.0 + 1e-12) {
                beaten += 1;
            }
        }
    }
    outcome(
        worst_rel <= 1e-12 && beaten == 0,
        format!("max relative gap to P_t|h|^2/s^2 = {worst_rel:.2e}; random combiners above MRC: {beaten} of 100000"),
    )
}

fn averaged_zo_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], mu: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = 10_000;
    let base = f(x);
    let mut avg = vec![0.0; x.len()];
    for _ in 0..n {
        let u = sample_direction(x.len(), DirectionMode::UnitSphere, rng);
        let shifted: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + mu * b).collect();
        for (a, g) in avg.iter_mut().zip(zo_gradient(base, f(&shifted), &u, mu)) {
            *a += g / n as f64;
        }
    }
    avg
}

fn zo_gradient_fidelity() -> Outcome {
    let lambda = lambda();
    let pilot = PilotConfig::from_dbm(-5.0, -90.0, 4).unwrap();
    let single = ScenarioGenerator { num_users: 1, ..Default::default() }.generate(40).unwrap();
    let multi = ScenarioGenerator::default().generate(41).unwrap();
    let (t1, t3) = (PathTable::new(&single), PathTable::new(&multi));
    let power = |x: &[f64]| t1.channel_matrix(&PositionVector::from_flat(x).unwrap()).frobenius_norm_sqr();
    let mse = |x: &[f64]| {
        let h = t3.channel_matrix(&PositionVector::from_flat(x).unwrap());
        sum_mse_objective(&h, pilot.noise_power, pilot.transmit_power).unwrap()
    };
    let objectives: [(&str, &dyn Fn(&[f64]) -> f64); 2] = [("power", &power), ("sum-MSE", &mse)];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut report = Vec::new();
    let mut pass = true;
    for (name, f) in objectives {
        let (mut worst, mut worst_default) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..20 {
            let x = region().sample_positions(4, &mut rng).to_flat();
            let fd = common::fd_gradient(f, &x, 1e-4 * lambda);
            let zo = averaged_zo_gradient(f, &x, 0.05 * lambda, &mut rng);
            worst = worst.min(common::cosine(&zo, &fd));
            let zo = averaged_zo_gradient(f, &x, ZoConfig::for_wavelength(lambda).smoothing, &mut rng);
            worst_default = worst_default.min(common::cosine(&zo, &fd));
        }
        pass &= worst >= 0.95;
        report.push(format!("{name}: min cosine {worst:.4} at mu = 0.05 lambda ({worst_default:.4} at the 0.3 lambda default)"));
    }
    outcome(pass, report.join("; "))
}

fn ls_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=8);
        let k = rng.random_range(1..=m);
        let h = common::random_mat(&mut rng, m, k);
        let pt = 10f64.powf(rng.random_range(-4.0..0.0));
        let block = PilotBlock::orthogonal(k, k).unwrap();
        let y = common::to_nalgebra(&h) * block.symbols() * num_complex::Complex64::new(pt.sqrt(), 0.0);
        let est = ls_estimate(&dfpo::environment::MeasurementBatch { received: y }, &block, pt).unwrap();
        worst = worst.max(common::frob_diff(&common::from_nalgebra(est.matrix()), &h));
    }
    outcome(worst <= 1e-10, format!("max Frobenius error {worst:.2e} over 1000 instances"))
}

fn constraint_soundness() -> Outcome {
    let d = lambda() / 4.0;
    let hw = region().half_width();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut min_ratio, mut outside, mut not_idempotent) = (f64::INFINITY, 0, 0);
    for case in 0..10_000 {
        let m = rng.random_range(1..=16);
        let pts: Vec<Position2D> = match case % 4 {
            0 => region().sample_positions(m, &mut rng).into_inner(),
            1 => vec![region().sample(&mut rng); m],
            2 => {
                let centres: Vec<Position2D> = (0..rng.random_range(1..=3)).map(|_| region().sample(&mut rng)).collect();
                (0..m)
                    .map(|i| {
                        let c = centres[i % centres.len()];
                        Position2D::new(
                            (c.x + rng.random_range(-d..d) / 5.0).clamp(-hw, hw),
                            (c.y + rng.random_range(-d..d) / 5.0).clamp(-hw, hw),
                        )
                    })
                    .collect()
            }
            _ => (0..m).map(|i| Position2D::new(if i % 2 == 0 { hw } else { -hw }, hw)).collect(),
        };
        let input = PositionVector::new(pts).unwrap();
        let out = refine_positions(&input, d, &region(), &mut rng).unwrap();
        outside += out.iter().filter(|p| !region().contains(p)).count();
        if m > 1 {
            min_ratio = min_ratio.min(out.min_pairwise_distance() / d);
        }
        if refine_positions(&out, d, &region(), &mut rng).unwrap() != out {
            not_idempotent += 1;
        }
    }
    outcome(
        min_ratio >= 1.0 - 1e-12 && outside == 0 && not_idempotent == 0,
        format!(
            "10000 inputs: min spacing / d = {min_ratio:.15}, outside region {outside}, not idempotent {not_idempotent}"
        ),
    )
}

fn oracle_hits(smoothing: f64) -> (usize, f64) {
    let lambda = lambda();
    let pilot = PilotConfig::from_dbm(-5.0, -90.0, 1).unwrap().noiseless();
    let cfg = ZoConfig { smoothing: smoothing * lambda, ..ZoConfig::for_wavelength(lambda) };
    let gen = ScenarioGenerator { num_users: 1, paths: PathCount::Uniform(2), ..Default::default() };
    let mut hits = 0;
    let mut worst: f64 = 1.0;
    for t in 0..50u64 {
        let s = gen.generate(derive_seed(7, t, Stream::Scenario)).unwrap();
        let mut env = Environment::new(s.clone(), pilot, 100, derive_seed(7, t, Stream::Environment)).unwrap();
        let (r, _) = optimize_single_user(&mut env, &constraints(), 1, &cfg, derive_seed(7, t, Stream::Optimizer)).unwrap();
        assert_eq!(env.budget().consumed(), 100);
        let power = |x: f64, y: f64| common::channel(&[Position2D::new(x, y)], &s)[0][0].norm_sqr();
        let (best, _, _) = common::grid_max(power, region().half_width(), 200);
        let ratio = power(r[0].x, r[0].y) / best;
        worst = worst.min(ratio);
        if ratio >= 0.95 {
            hits += 1;
        }
    }
    (hits, worst)
}

// Noiseless probes need no noise margin, so the smoothing radius drops to 0.05 lambda.
fn single_user_oracle_optimality() -> Outcome {
    let (hits, worst) = oracle_hits(0.05);
    let (default_hits, _) = oracle_hits(ZoConfig::for_wavelength(1.0).smoothing);
    outcome(
        hits >= 45,
        format!(
            "{hits} of 50 trials within 5% of the grid optimum at mu = 0.05 lambda (worst ratio {worst:.3}); \
             {default_hits} of 50 at the 0.3 lambda default"
        ),
    )
}

fn preset(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)).unwrap()
}

fn means(rows: &[ResultRow]) -> BTreeMap<(Method, i64), f64> {
    let mut acc: BTreeMap<(Method, i64), (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry((r.method, r.axis_value.round() as i64)).or_default();
        e.0 += r.sum_rate;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

fn sweep(cfg: &ExperimentConfig) -> BTreeMap<(Method, i64), f64> {
    means(&run_sweep_with_workers(cfg, std::io::sink(), false, worker_count()).unwrap())
}

fn single_user_budget_trend() -> Outcome {
    let mut cfg = preset("single_user_budget.toml");
    cfg.trials = 100;
    let m = sweep(&cfg);
    let budgets = [40, 70, 100, 130];
    let dfpo: Vec<f64> = budgets.iter().map(|&b| m[&(Method::Dfpo, b)]).collect();
    let rps: Vec<f64> = budgets.iter().map(|&b| m[&(Method::Rps, b)]).collect();
    let fpa: Vec<f64> = budgets.iter().map(|&b| m[&(Method::Fpa, b)]).collect();
    let monotone = dfpo.windows(2).all(|w| w[1] >= w[0]);
    let over_rps = dfpo.iter().zip(&rps).all(|(a, b)| a >= b);
    let over_fpa = dfpo.iter().zip(&fpa).skip(1).all(|(a, b)| a >= b);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/");
    outcome(
        monotone && over_rps && over_fpa,
        format!(
            "T_all 40/70/100/130: dfpo {} rps {} fpa {}; non-decreasing {monotone}, dfpo>=rps {over_rps}, dfpo>=fpa {over_fpa}",
            fmt(&dfpo),
            fmt(&rps),
            fmt(&fpa)
        ),
    )
}

fn multi_user_ordering() -> Outcome {
    let mut cfg = preset("multi_user_power.toml");
    cfg.trials = 100;
    cfg.sweep.values = vec![-20.0, -5.0];
    let m = sweep(&cfg);
    let at = |method, p| m[&(method, p)];
    let (pso, dfpo, rps, fpa) = (at(Method::PsoUb, -5), at(Method::Dfpo, -5), at(Method::Rps, -5), at(Method::Fpa, -5));
    let (low_dfpo, low_fpa) = (at(Method::Dfpo, -20), at(Method::Fpa, -20));
    let checks = [pso >= dfpo, dfpo >= rps, dfpo >= fpa, low_dfpo >= low_fpa];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "-5 dBm: pso_ub {pso:.3} dfpo {dfpo:.3} rps {rps:.3} fpa {fpa:.3}; -20 dBm: dfpo {low_dfpo:.3} fpa {low_fpa:.3}; \
             pso>=dfpo {} dfpo>=rps {} dfpo>=fpa {} low-power dfpo>=fpa {}",
            checks[0], checks[1], checks[2], checks[3]
        ),
    )
}

fn path_count_robustness() -> Outcome {
    let mut cfg = preset("multi_user_paths.toml");
    cfg.trials = 100;
    cfg.methods = vec![Method::Dfpo];
    let m = sweep(&cfg);
    let v: Vec<f64> = [10, 40, 70, 100].iter().map(|&l| m[&(Method::Dfpo, l)]).collect();
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = (hi - lo) / lo;
    outcome(
        spread <= 0.15,
        format!(
            "L 10/40/70/100: {}; (max - min) / min = {:.1}%",
            v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/"),
            100.0 * spread
        ),
    )
}

fn surface_dominance() -> Outcome {
    let mut cfg = preset("surface.toml");
    cfg.trials = 100;
    let value = cfg.sweep.values[0];
    let setup = cfg.setup(value).unwrap();
    let (pt, n0) = (setup.pilot.transmit_power, setup.pilot.noise_power);
    let (mut violations, mut improved, mut visited) = (0, 0, 0);
    let mut worst_margin = f64::INFINITY;
    for trial in 0..cfg.trials {
        let o = run_trial_detailed(&cfg, Method::Dfpo, value, trial).unwrap();
        let scenario: ScenarioParams = trial_scenario(&cfg, &setup, trial).unwrap();
        let surface = snr_surface(&scenario, &setup.constraints.region, pt, n0, 401).unwrap();
        let traj = o.trajectory.unwrap();
        for r in traj.visited().chain(std::iter::once(&traj.final_positions)) {
            for p in r.iter() {
                let v = probe_snr(&scenario, *p, pt, n0);
                visited += 1;
                worst_margin = worst_margin.min(surface.max() / v);
                if v > surface.max() {
                    violations += 1;
                }
            }
        }
        let initial = mmse_sum_rate(&dfpo::scenario::channel_matrix(&traj.initial_positions, &scenario), n0, pt);
        if o.row.sum_rate >= initial {
            improved += 1;
        }
    }
    outcome(
        violations == 0 && improved >= 95,
        format!(
            "surface max below a visited probe SNR {violations} of {visited} times (min margin {worst_margin:.4}); \
             final rate >= initial-candidate rate in {improved} of 100 trials"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_dfpo");
    let dir = tempfile::tempdir().unwrap();
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut names: Vec<PathBuf> = std::fs::read_dir(&presets).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    let run = |args: &[&str], out: &Path| -> Vec<u8> {
        let status = Command::new(bin).args(args).arg("--out").arg(out).stderr(Stdio::null()).status().unwrap();
        assert!(status.success(), "{args:?}");
        std::fs::read(out).unwrap()
    };
    let mut differing = Vec::new();
    for p in &names {
        let cfg = p.to_str().unwrap();
        let a = run(&["run", "--config", cfg, "--trials", "2", "--seed", "12"], &dir.path().join("a.csv"));
        let b = run(&["run", "--config", cfg, "--trials", "2", "--seed", "12"], &dir.path().join("b.csv"));
        if a != b {
            differing.push(p.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    let surface = presets.join("surface.toml");
    let cfg = surface.to_str().unwrap();
    let a = run(&["surface", "--config", cfg, "--res", "50"], &dir.path().join("s1.csv"));
    let b = run(&["surface", "--config", cfg, "--res", "50"], &dir.path().join("s2.csv"));
    if a != b {
        differing.push("surface".into());
    }
    outcome(
        differing.is_empty(),
        format!("{} preset runs and one surface run repeated; differing outputs: {differing:?}", names.len()),
    )
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("rate-MSE identity", Duration::from_secs(5), rate_mse_identity),
        ("sum-MSE trace identity", Duration::from_secs(5), sum_mse_trace_identity),
        ("MRC optimality", Duration::from_secs(5), mrc_optimality),
        ("ZO gradient fidelity", Duration::from_secs(30), zo_gradient_fidelity),
        ("LS exactness", Duration::from_secs(5), ls_exactness),
        ("constraint soundness", Duration::from_secs(30), constraint_soundness),
        ("single-user oracle optimality", Duration::from_secs(60), single_user_oracle_optimality),
        ("single-user budget trend", Duration::from_secs(600), single_user_budget_trend),
        ("multi-user ordering", Duration::from_secs(900), multi_user_ordering),
        ("path-count robustness", Duration::from_secs(900), path_count_robustness),
        ("surface dominance and improvement", Duration::from_secs(300), surface_dominance),
        ("CLI determinism", Duration::from_secs(300), cli_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f.parse() == Ok(n) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {name}: {} [{:.1} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
