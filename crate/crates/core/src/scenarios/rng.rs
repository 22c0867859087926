//! Per-drop random streams.
//!
//! Drop `i` of a run seeded with `s` draws from a SplitMix64 stream whose
//! state starts at `s ^ i`, so every drop is reproducible on its own and the
//! result does not depend on how drops are spread over threads.

use std::f64::consts::{FRAC_PI_2, PI};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub struct DropRng(SplitMix64);

impl DropRng {
    pub fn for_drop(seed: u64, drop: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed ^ drop))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn next_open_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform azimuth strictly inside `(-pi/2, pi/2)`.
    pub fn next_azimuth(&mut self) -> f64 {
        loop {
            let phi = (self.next_open_unit() - 0.5) * PI;
            if phi.abs() < FRAC_PI_2 {
                return phi;
            }
        }
    }
}
