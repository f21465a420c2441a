//! Seeds and Gaussian streams.
//!
//! A [`Seed`] is a `(value, stream)` pair. The value keys a ChaCha8 block
//! cipher and the stream selects one of its 2^64 independent counter
//! sequences, so parallel workers take disjoint streams instead of sharing a
//! generator. Normals come from Box–Muller on 53-bit uniforms.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Seed {
    pub value: u64,
    pub stream: u64,
}

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Seed {
    pub const fn new(value: u64) -> Self {
        Self { value, stream: 0 }
    }

    pub const fn with_stream(value: u64, stream: u64) -> Self {
        Self { value, stream }
    }

    /// Child seed number `index`. Children of distinct parents, and distinct
    /// children of one parent, key distinct generator states.
    pub const fn split(&self, index: u64) -> Seed {
        let key = splitmix64(self.value ^ splitmix64(self.stream ^ 0x5eed_5eed_5eed_5eed));
        Seed { value: key, stream: index }
    }
}

impl Default for Seed {
    fn default() -> Self {
        Seed::new(0)
    }
}

/// Standard normal stream for one [`Seed`].
#[derive(Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: Seed) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.value);
        rng.set_stream(seed.stream);
        Self { rng, spare: None }
    }

    /// Uniform on the open interval (0, 1), 53 random bits.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `0..bound` (rejection sampling, unbiased).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.rng.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        let (s, c) = libm::sincos(theta);
        self.spare = Some(r * s);
        r * c
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.next_gaussian();
        }
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
