// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded standard-normal stream.
//!
//! Generator: ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`, seeded with
//! `seed_from_u64`), whose output is fixed by the crate's stability contract.
//! Transform: basic Box–Muller on 53-bit uniforms, using the pure-Rust `libm`
//! routines so results do not depend on the platform's math library. Each pair
//! of uniforms `(u₁, u₂)` yields `√(−2 ln u₁)·cos(2πu₂)` then `…·sin(2πu₂)`.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct StandardNormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl StandardNormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `(0, 1]`.
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG_53
    }

    /// Uniform in `[0, 1)`.
    fn half_open_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let radius = libm::sqrt(-2.0 * libm::log(self.open_unit()));
        let angle = 2.0 * PI * self.half_open_unit();
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }
}

impl Iterator for StandardNormalStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}

/// Unbounded stream of standard normals for `seed`.
pub fn standard_normal_stream(seed: u64) -> StandardNormalStream {
    StandardNormalStream::new(seed)
}
