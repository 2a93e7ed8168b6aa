//! Seed derivation and random streams.
//!
//! Every random stream in the crate is a xoshiro256++ generator seeded via
//! `Xoshiro256PlusPlus::seed_from_u64`, which expands the 64-bit seed with
//! SplitMix64. Child seeds are derived positionally with [`mix_seed`], so the
//! seed of item `i` never depends on how many draws other items made.

use rand::RngCore;
use rand::SeedableRng;
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

/// `splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15)`: the `index + 1`-th
/// output of a SplitMix64 stream started at `master`.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let golden = 0x9E37_79B9_7F4A_7C15u64;
    SplitMix64::seed_from_u64(master.wrapping_add(index.wrapping_mul(golden))).next_u64()
}

pub fn stream(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform draw in [0, 1) from the top 53 bits of one output.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw via Box-Muller; consumes exactly two outputs.
pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
