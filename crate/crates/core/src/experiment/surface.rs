//! Receive-SNR maps of a single probe antenna over the movable region.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scenario::{channel_response, MovableRegion, Position2D, ScenarioParams};

/// `N×N` samples of `P_t·|h(x, y)|²/σ²`, row-major with `y` outer and `x`
/// inner, on an inclusive grid spanning the region.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSurface {
    resolution: usize,
    half_width: f64,
    values: Vec<f64>,
}

/// Linear receive SNR of one antenna at `pos`.
pub fn probe_snr(scenario: &ScenarioParams, pos: Position2D, transmit_power: f64, noise_power: f64) -> f64 {
    let h = channel_response(pos, &scenario.users[0], scenario.wavelength());
    transmit_power * h.norm_sqr() / noise_power
}

fn axis(resolution: usize, half_width: f64, i: usize) -> f64 {
    if resolution == 1 {
        0.0
    } else {
        -half_width + 2.0 * half_width * i as f64 / (resolution - 1) as f64
    }
}

pub fn snr_surface(
    scenario: &ScenarioParams,
    region: &MovableRegion,
    transmit_power: f64,
    noise_power: f64,
    resolution: usize,
) -> Result<SnrSurface> {
    if scenario.num_users() != 1 {
        return Err(Error::usage(format!("SNR surface needs one user, got {}", scenario.num_users())));
    }
    if resolution == 0 {
        return Err(Error::config("surface resolution must be at least 1"));
    }
    let hw = region.half_width();
    let mut values = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let p = Position2D::new(axis(resolution, hw, i), axis(resolution, hw, j));
            values.push(probe_snr(scenario, p, transmit_power, noise_power));
        }
    }
    Ok(SnrSurface { resolution, half_width: hw, values })
}

impl SnrSurface {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Grid spacing; zero for a one-point surface.
    pub fn spacing(&self) -> f64 {
        if self.resolution == 1 {
            0.0
        } else {
            2.0 * self.half_width / (self.resolution - 1) as f64
        }
    }

    pub fn point(&self, i: usize, j: usize) -> Position2D {
        Position2D::new(axis(self.resolution, self.half_width, i), axis(self.resolution, self.half_width, j))
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.resolution + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid point of the largest value, first in row-major order on ties.
    pub fn argmax(&self) -> Position2D {
        let mut best = 0;
        for (idx, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = idx;
            }
        }
        self.point(best % self.resolution, best / self.resolution)
    }

    /// `x,y,snr_db`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "snr_db"])?;
        for j in 0..self.resolution {
            for i in 0..self.resolution {
                let p = self.point(i, j);
                w.write_record([
                    format!("{:e}", p.x),
                    format!("{:e}", p.y),
                    format!("{:.9}", 10.0 * self.value(i, j).log10()),
                ])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
