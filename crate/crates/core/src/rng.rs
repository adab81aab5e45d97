//! Seeded random substreams.
//!
//! Every stochastic operation draws from a stream derived from one root seed
//! plus a tag and a tuple of indices. A (group, repeat) pair always sees the
//! same stream no matter which worker runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn new(seed: u64) -> Self {
        RandomSeed(seed)
    }

    /// Derives a child seed for `tag` and `indices`.
    pub fn derive(&self, tag: &str, indices: &[u64]) -> RandomSeed {
        let mut h = splitmix64(self.0 ^ fnv1a(tag.as_bytes()));
        for &i in indices {
            h = splitmix64(h ^ splitmix64(i.wrapping_add(0x632b_e59b_d9b4_e019)));
        }
        RandomSeed(h)
    }

    /// Generator for the substream identified by `tag` and `indices`.
    pub fn stream(&self, tag: &str, indices: &[u64]) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.derive(tag, indices).0)
    }
}

impl From<u64> for RandomSeed {
    fn from(seed: u64) -> Self {
        RandomSeed(seed)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
