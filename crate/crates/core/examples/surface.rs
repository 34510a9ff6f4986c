//! Receive-SNR map of one antenna, with where the optimizer went on it.

use dfpo::experiment::{probe_snr, snr_surface};
use dfpo::scenario::{CarrierConfig, PathCount};
use dfpo::*;

fn main() -> Result<()> {
    let lambda = CarrierConfig::default().wavelength();
    let region = MovableRegion::with_side(4.0 * lambda)?;
    let constraints = PlacementConstraints::new(region, lambda / 4.0)?;
    let scenario = ScenarioGenerator { num_users: 1, paths: PathCount::Uniform(6), ..Default::default() }.generate(1)?;
    let pilot = PilotConfig::from_dbm(-5.0, -90.0, 1)?;
    let (pt, n0) = (pilot.transmit_power, pilot.noise_power);

    let surface = snr_surface(&scenario, &region, pt, n0, 201)?;
    let db = |v: f64| 10.0 * v.log10();
    let peak = surface.argmax();
    println!("SNR range {:.1} .. {:.1} dB, peak at ({:+.4}, {:+.4})", db(surface.min()), db(surface.max()), peak.x, peak.y);

    let mut env = Environment::new(scenario.clone(), pilot, 100, 2)?;
    let (r, trajectory) = optimize_single_user(&mut env, &constraints, 1, &ZoConfig::for_wavelength(lambda), 3)?;
    let start = trajectory.initial_positions[0];
    println!("start  {:.1} dB", db(probe_snr(&scenario, start, pt, n0)));
    println!("final  {:.1} dB", db(probe_snr(&scenario, r[0], pt, n0)));

    let out = std::env::temp_dir().join("dfpo_surface.csv");
    surface.write_csv(std::fs::File::create(&out).expect("temp file"))?;
    println!("wrote {}", out.display());
    Ok(())
}
