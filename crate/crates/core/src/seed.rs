//! Deterministic seeding.
//!
//! Every random stream in the crate is a `Xoshiro256++` generator (from
//! `rand_xoshiro`) initialised through `seed_from_u64`, which expands the
//! 64-bit seed with SplitMix64. Child seeds are derived with [`mix`], so any
//! task can rebuild its stream from `(parent_seed, task_index)` without
//! touching shared state. Floats and bounded integers are produced by the
//! helpers below rather than by `rand` distributions so the output is fixed
//! by this file alone.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Rng = Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of child `index` from `parent`.
#[inline]
pub fn mix(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn unit_f64(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `[lo, hi]` (closed up to rounding).
#[inline]
pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_f64(rng)
}

/// Uniform integer in `0..n` by 128-bit multiply; bias is below 2^-64 * n.
#[inline]
pub fn below(rng: &mut Rng, n: u64) -> u64 {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}
