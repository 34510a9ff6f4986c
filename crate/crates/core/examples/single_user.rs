//! Place four antennas for one user from received-power probes only.

use dfpo::baselines::fpa_layout;
use dfpo::objectives::mmse_sum_rate;
use dfpo::scenario::{channel_matrix, CarrierConfig};
use dfpo::*;

fn main() -> Result<()> {
    let lambda = CarrierConfig::default().wavelength();
    let region = MovableRegion::with_side(4.0 * lambda)?;
    let constraints = PlacementConstraints::new(region, lambda / 4.0)?;
    let scenario = ScenarioGenerator { num_users: 1, ..Default::default() }.generate(11)?;
    let pilot = PilotConfig::from_dbm(-5.0, -90.0, 1)?;

    let mut env = Environment::new(scenario.clone(), pilot, 100, 1)?;
    let cfg = ZoConfig::for_wavelength(lambda);
    let (positions, trajectory) = optimize_single_user(&mut env, &constraints, 4, &cfg, 2)?;

    let rate = |r: &PositionVector| mmse_sum_rate(&channel_matrix(r, &scenario), pilot.noise_power, pilot.transmit_power);
    println!("pilots used   {} of {}", env.budget().consumed(), env.budget().cap());
    println!("fixed array   {:.3} bit/s/Hz", rate(&fpa_layout(4, lambda, &region)?));
    println!("best initial  {:.3} bit/s/Hz", rate(&trajectory.initial_positions));
    println!("optimized     {:.3} bit/s/Hz", rate(&positions));
    for p in positions.iter() {
        println!("  ({:+.4}, {:+.4}) m", p.x, p.y);
    }
    Ok(())
}
