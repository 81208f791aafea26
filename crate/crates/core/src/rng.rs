//! Seeds and the stream-derivation rule.
//!
//! A [`Seed`] is a 64-bit value. Generators are `ChaCha8Rng` seeded through
//! `SeedableRng::seed_from_u64`, and normal variates use the ziggurat sampler
//! of `rand_distr::StandardNormal`. Child seeds are derived with
//! [`Seed::derive`], which runs the parent and a tag through the SplitMix64
//! finaliser; sweeps derive one seed per `(dimension index, N, replicate)`
//! by chaining three derivations, so any replicate can be reproduced alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Generator = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Seed {
    #[inline]
    pub fn master(self) -> u64 {
        self.0
    }

    /// Child seed for `tag`. Distinct tags give statistically independent
    /// streams.
    pub fn derive(self, tag: u64) -> Seed {
        let t = mix64(tag.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        Seed(mix64(self.0.wrapping_add(GOLDEN_GAMMA) ^ t))
    }

    /// Seed of one replicate in a sweep grid.
    pub fn split(self, dim_index: u64, n: u64, replicate: u64) -> Seed {
        self.derive(dim_index).derive(n).derive(replicate)
    }

    pub fn generator(self) -> Generator {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}
