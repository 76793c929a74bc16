//! Reproducible Gaussian noise.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded from a
//! `u64` via `SeedableRng::seed_from_u64`. Standard normals come from the
//! Box–Muller cosine branch: with `u1 ∈ (0, 1]` and `u2 ∈ [0, 1)` built from
//! the top 53 bits of successive `next_u64` draws,
//! `z = sqrt(-2 ln u1) cos(2π u2)`. One normal consumes two words.
//!
//! Independent streams for repeated experiments are derived with
//! [`derive_seed`], a SplitMix64 finalizer over `base + (index + 1) * φ64`.

use rand_chacha::{
    rand_core::{RngCore, SeedableRng},
    ChaCha20Rng,
};
use std::f64::consts::PI;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `index` in a study with base seed `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

pub struct GaussianNoise {
    rng: ChaCha20Rng,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on `[0, 1)` from the top 53 bits of one word.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}
