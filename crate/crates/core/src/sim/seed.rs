//! Seed derivation.
//!
//! Trial `i` of a campaign with base seed `b` uses the (i+1)-th output of a
//! SplitMix64 generator started at `b`, i.e. `mix(b + (i+1)·φ)` with φ the
//! 64-bit golden-ratio increment. Within a trial, independent streams for
//! the topology, caches, requests and fading are derived with [`sub_seed`].

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `x + φ`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(trial.wrapping_mul(GOLDEN)))
}

pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x5EED)))
}

/// Top 53 bits of `h` as a uniform number in [0, 1).
pub fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
