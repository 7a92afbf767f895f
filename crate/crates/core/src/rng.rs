//! Splittable, seeded random streams.
//!
//! Every stochastic operation in the crate takes an explicit [`RandomStream`].
//! Children obtained with [`RandomStream::split`] depend only on the parent's
//! identity and the child index, never on how many draws the parent has made,
//! so blocks and replicates can be evaluated in any order (or in parallel)
//! and still produce bit-identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A deterministic random stream backed by ChaCha8.
#[derive(Debug, Clone)]
pub struct RandomStream {
    id: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        let id = splitmix64(seed);
        Self {
            id,
            rng: ChaCha8Rng::seed_from_u64(id),
        }
    }

    /// Identity of this stream; two streams with equal ids emit equal draws.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Derives the `index`-th child stream.
    pub fn split(&self, index: u64) -> Self {
        let id = splitmix64(self.id ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)));
        Self {
            id,
            rng: ChaCha8Rng::seed_from_u64(id),
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn normal(&mut self, sigma: f64) -> f64 {
        sigma * self.standard_normal()
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.standard_normal();
        }
    }
}
