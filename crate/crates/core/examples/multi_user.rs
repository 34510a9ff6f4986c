//! Three users, four antennas, 160 pilot symbols: descend the estimated sum-MSE.

use dfpo::objectives::{mmse_rate_report, sum_mse_objective};
use dfpo::scenario::{channel_matrix, CarrierConfig};
use dfpo::*;

fn main() -> Result<()> {
    let lambda = CarrierConfig::default().wavelength();
    let region = MovableRegion::with_side(4.0 * lambda)?;
    let constraints = PlacementConstraints::new(region, lambda / 4.0)?;
    let scenario = ScenarioGenerator::default().generate(3)?;
    let pilot = PilotConfig::from_dbm(-5.0, -90.0, 4)?;
    let mut env = Environment::new(scenario.clone(), pilot, 160, 4)?;

    // 160 symbols at T = 4 buys 40 evaluations: 8 candidates and 16 iterations
    let cfg = ZoConfig { init_candidates: 8, iterations: 16, ..ZoConfig::for_wavelength(lambda) };
    let (positions, trajectory) = optimize_multi_user(&mut env, &constraints, 4, &cfg, 5)?;

    for (i, rec) in trajectory.records.iter().enumerate().step_by(4) {
        println!("iteration {i:>2}: estimated sum-MSE {:.4}", rec.probe_base);
    }
    let h = channel_matrix(&positions, &scenario);
    let report = mmse_rate_report(&h, pilot.noise_power, pilot.transmit_power);
    println!("true sum-MSE {:.4}", sum_mse_objective(&h, pilot.noise_power, pilot.transmit_power)?);
    println!("per-user rate {:?}", report.rate.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>());
    println!("sum rate {:.3} bit/s/Hz, {} symbols used", report.sum_rate, env.budget().consumed());
    Ok(())
}
