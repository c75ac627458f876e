//! Substream derivation for reproducible parallel sampling.
//!
//! Every random quantity in the crate is drawn from a generator seeded by
//! `derive_seed(master_seed, key)`. Keys are built by chaining
//! [`StreamKey::child`], so a trial's stream depends only on *what* it is
//! (study, schedule point, trial index) and never on which worker runs it.
//!
//! Mixing uses the SplitMix64 finalizer:
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9
//! z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! with the golden-ratio increment `0x9E37_79B9_7F4A_7C15`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifier of an independent random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(pub u64);

impl StreamKey {
    pub const fn new(raw: u64) -> Self {
        StreamKey(raw)
    }

    /// Derives the key of a nested substream, e.g. `study.child(d).child(trial)`.
    pub fn child(self, index: u64) -> Self {
        let salt = splitmix64(index.wrapping_add(GOLDEN));
        StreamKey(splitmix64(self.0.wrapping_mul(GOLDEN) ^ salt))
    }
}

pub fn derive_seed(master_seed: u64, key: StreamKey) -> u64 {
    splitmix64(master_seed ^ splitmix64(key.0.wrapping_add(GOLDEN)))
}

pub fn stream_rng(master_seed: u64, key: StreamKey) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, key))
}
