//! Draw a three-user scenario and print the channel seen by a 2x2 array.

use dfpo::scenario::{channel_matrix, CarrierConfig};
use dfpo::{Position2D, PositionVector, ScenarioGenerator};

fn main() {
    let lambda = CarrierConfig::default().wavelength();
    let scenario = ScenarioGenerator::default().generate(7).unwrap();
    for (k, u) in scenario.users.iter().enumerate() {
        println!("user {k}: {} paths at {:.1} m, path power {:.3e}", u.num_paths(), u.distance, u.path_power());
    }

    let h = lambda / 4.0;
    let array = PositionVector::new(vec![
        Position2D::new(-h, -h),
        Position2D::new(h, -h),
        Position2D::new(-h, h),
        Position2D::new(h, h),
    ])
    .unwrap();
    let g = channel_matrix(&array, &scenario);
    for (m, row) in g.matrix().row_iter().enumerate() {
        let gains: Vec<String> = row.iter().map(|h| format!("{:7.1} dB", 10.0 * h.norm_sqr().log10())).collect();
        println!("antenna {m}: {}", gains.join("  "));
    }
    println!("|H|_F^2 = {:.3e}", g.frobenius_norm_sqr());
}
