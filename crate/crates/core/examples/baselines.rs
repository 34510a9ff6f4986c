//! Fixed array, random selection and the perfect-CSI swarm bound on one scenario.

use dfpo::baselines::{fpa_layout, pso_upper_bound, random_position_selection, PsoConfig, TrueObjective};
use dfpo::objectives::mmse_sum_rate;
use dfpo::scenario::{channel_matrix, CarrierConfig};
use dfpo::*;

fn main() -> Result<()> {
    let lambda = CarrierConfig::default().wavelength();
    let region = MovableRegion::with_side(4.0 * lambda)?;
    let constraints = PlacementConstraints::new(region, lambda / 4.0)?;
    let scenario = ScenarioGenerator::default().generate(21)?;
    let pilot = PilotConfig::from_dbm(-5.0, -90.0, 4)?;
    let rate = |r: &PositionVector| mmse_sum_rate(&channel_matrix(r, &scenario), pilot.noise_power, pilot.transmit_power);

    let fpa = fpa_layout(4, lambda, &region)?;
    let mut env = Environment::new(scenario.clone(), pilot, 160, 1)?;
    let rps = random_position_selection(&mut env, &constraints, 4, 40, 2)?;
    let objective = TrueObjective::SumMse { noise_power: pilot.noise_power, transmit_power: pilot.transmit_power };
    let pso = pso_upper_bound(&scenario, &constraints, 4, &PsoConfig::for_region(&region), objective, 3)?;

    println!("fpa     {:.3}", rate(&fpa));
    println!("rps     {:.3}  ({} symbols)", rate(&rps), env.budget().consumed());
    println!("pso_ub  {:.3}", rate(&pso));
    Ok(())
}
