//! Independent RNG streams derived from a master seed.

/// Named streams; each trial draws one seed per stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Scenario = 1,
    Environment = 2,
    Optimizer = 3,
    Baseline = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for `stream` of trial `trial` under `master`.
pub fn derive_seed(master: u64, trial: u64, stream: Stream) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(trial)) ^ stream as u64)
}
