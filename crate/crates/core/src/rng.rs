// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded, splittable random streams.
//!
//! A [`RandomStream`] is a 64-bit key. Substreams are derived by hashing the
//! parent key with an index, so any replicate can be regenerated on its own
//! without replaying its predecessors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RandomStream {
    key: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: splitmix64(seed),
        }
    }

    /// Independent child stream number `index`.
    pub fn substream(&self, index: u64) -> Self {
        let salted = splitmix64(index ^ self.key.rotate_left(17));
        Self {
            key: splitmix64(self.key ^ salted),
        }
    }

    /// A seed value that reproduces this stream through [`RandomStream::new`]'s
    /// consumers (for example a `DivisiveConfig::seed`).
    pub fn seed(&self) -> u64 {
        self.key
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}
