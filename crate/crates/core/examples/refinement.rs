//! Repair a placement whose antennas are too close together.

use dfpo::refine::{classify_antennas, refine_positions};
use dfpo::scenario::CarrierConfig;
use dfpo::{MovableRegion, Position2D, PositionVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let lambda = CarrierConfig::default().wavelength();
    let d = lambda / 4.0;
    let region = MovableRegion::with_side(4.0 * lambda).unwrap();
    let crowded = PositionVector::new(vec![
        Position2D::new(0.0, 0.0),
        Position2D::new(0.002, 0.0),
        Position2D::new(0.0, 0.0),
        Position2D::new(0.05, 0.05),
    ])
    .unwrap();

    let split = classify_antennas(&crowded, d);
    println!("violators {:?}, compliant {:?}", split.violators, split.compliant);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let fixed = refine_positions(&crowded, d, &region, &mut rng).unwrap();
    for (a, b) in crowded.iter().zip(fixed.iter()) {
        println!("({:+.4}, {:+.4}) -> ({:+.4}, {:+.4})", a.x, a.y, b.x, b.y);
    }
    println!("min spacing {:.4} m, required {:.4} m", fixed.min_pairwise_distance(), d);
}
