//! Minimum inter-antenna distance enforcement by projection onto a grid.
//!
//! The optimizers only keep antennas inside the region; spacing is repaired
//! afterwards. Antennas that already keep distance `d` from every other
//! antenna stay put. Each violator, in ascending index order, moves to the
//! nearest free point of a spacing-`d` grid with a random origin. A grid point
//! is free when it is unassigned and at least `d` away from every compliant
//! antenna.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scenario::{MovableRegion, Position2D, PositionVector};

/// Relative slack on spacing comparisons. Grid neighbours sit exactly `d`
/// apart only in exact arithmetic; rounding can shave off an ulp.
pub const SPACING_TOLERANCE: f64 = 1e-9;

/// Fresh grid origins tried before giving up on a refinement.
pub const MAX_GRID_ATTEMPTS: usize = 8;

/// Region plus minimum spacing: the feasible set of every placement problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementConstraints {
    pub region: MovableRegion,
    pub min_distance: f64,
}

impl PlacementConstraints {
    pub fn new(region: MovableRegion, min_distance: f64) -> Result<Self> {
        if !(min_distance.is_finite() && min_distance > 0.0) {
            return Err(Error::config(format!("minimum distance must be positive, got {min_distance}")));
        }
        if min_distance > region.side() {
            return Err(Error::config(format!(
                "minimum distance {min_distance} exceeds the region side {}",
                region.side()
            )));
        }
        Ok(Self { region, min_distance })
    }

    /// Region membership and pairwise spacing, up to [`SPACING_TOLERANCE`].
    pub fn is_satisfied_by(&self, positions: &PositionVector) -> bool {
        positions.iter().all(|p| self.region.contains(p))
            && classify_antennas(positions, self.min_distance).violators.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: Position2D,
    pub spacing: f64,
    /// Sorted by x, then y.
    pub points: Vec<Position2D>,
}

impl GridSpec {
    /// Points `o + k·d·x̂ + l·d·ŷ` that fall inside the region.
    pub fn with_origin(region: &MovableRegion, spacing: f64, origin: Position2D) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::config(format!("grid spacing must be positive, got {spacing}")));
        }
        let hw = region.half_width();
        let axis = |o: f64| -> Vec<f64> {
            let lo = ((-hw - o) / spacing - SPACING_TOLERANCE).ceil() as i64;
            let hi = ((hw - o) / spacing + SPACING_TOLERANCE).floor() as i64;
            (lo..=hi)
                .map(|k| region.clamp_coordinate(o + k as f64 * spacing))
                .collect()
        };
        let xs = axis(origin.x);
        let ys = axis(origin.y);
        let points: Vec<Position2D> = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| Position2D::new(x, y)))
            .collect();
        if points.is_empty() {
            return Err(Error::GridEmpty { spacing });
        }
        Ok(Self { origin, spacing, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Grid with an origin drawn uniformly from the region.
pub fn build_grid<R: Rng + ?Sized>(region: &MovableRegion, spacing: f64, rng: &mut R) -> Result<GridSpec> {
    if spacing > region.side() {
        return Err(Error::GridEmpty { spacing });
    }
    let origin = region.sample(rng);
    GridSpec::with_origin(region, spacing, origin)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RefinementSets {
    /// Antennas closer than `d` to some other antenna.
    pub violators: Vec<usize>,
    pub compliant: Vec<usize>,
    /// Grid indices unavailable to violators.
    pub occupied: Vec<usize>,
}

pub fn classify_antennas(positions: &PositionVector, min_distance: f64) -> RefinementSets {
    let threshold = min_distance * (1.0 - SPACING_TOLERANCE);
    let pts = positions.positions();
    let mut violating = vec![false; pts.len()];
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].distance(&pts[j]) < threshold {
                violating[i] = true;
                violating[j] = true;
            }
        }
    }
    let (violators, compliant) = (0..pts.len()).partition(|&i| violating[i]);
    RefinementSets { violators, compliant, occupied: Vec::new() }
}

/// One refinement pass on a fixed grid.
pub fn refine_on_grid(positions: &PositionVector, min_distance: f64, grid: &GridSpec) -> Result<PositionVector> {
    let mut sets = classify_antennas(positions, min_distance);
    if sets.violators.is_empty() {
        return Ok(positions.clone());
    }
    let mut taken: Vec<bool> = grid
        .points
        .iter()
        .map(|g| sets.compliant.iter().any(|&i| g.distance(&positions[i]) < min_distance))
        .collect();
    sets.occupied = (0..grid.len()).filter(|&i| taken[i]).collect();

    let mut out = positions.clone().into_inner();
    for &p in &sets.violators {
        let target = positions[p];
        let best = grid
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .min_by(|(_, a), (_, b)| {
                let da = a.distance(&target);
                let db = b.distance(&target);
                da.total_cmp(&db)
                    .then(a.x.total_cmp(&b.x))
                    .then(a.y.total_cmp(&b.y))
            });
        let Some((idx, g)) = best else {
            return Err(Error::AvailableGridExhausted { antenna: p, attempts: 1 });
        };
        out[p] = *g;
        taken[idx] = true;
    }
    PositionVector::new(out)
}

/// Repairs minimum-spacing violations, retrying with fresh grid origins when
/// a grid runs out of free points.
pub fn refine_positions<R: Rng + ?Sized>(
    positions: &PositionVector,
    min_distance: f64,
    region: &MovableRegion,
    rng: &mut R,
) -> Result<PositionVector> {
    if classify_antennas(positions, min_distance).violators.is_empty() {
        return Ok(positions.clone());
    }
    let mut last = None;
    for attempt in 1..=MAX_GRID_ATTEMPTS {
        let grid = build_grid(region, min_distance, rng)?;
        match refine_on_grid(positions, min_distance, &grid) {
            Err(Error::AvailableGridExhausted { antenna, .. }) => {
                last = Some(Error::AvailableGridExhausted { antenna, attempts: attempt });
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}
