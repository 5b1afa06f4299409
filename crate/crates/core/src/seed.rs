//! Deterministic seed derivation.
//!
//! A run seed is `splitmix64(master ⊕ fnv1a(tag) ⊕ splitmix64(index))`, so
//! streams for different algorithm tags and trial indices are independent
//! and stable across platforms and compiler versions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xCBF2_9CE4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(master ^ fnv1a(tag.as_bytes()) ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeds of the two random streams a run consumes: `env` for prompt draws,
/// `agent` for everything the algorithm samples (actions, labels).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeed {
    pub env: u64,
    pub agent: u64,
}

impl RunSeed {
    /// Streams for one roster entry in one trial. The env stream ignores the
    /// algorithm tag so every algorithm sees the same prompt sequence.
    pub fn for_trial(master: u64, algorithm: &str, trial: u64) -> Self {
        Self {
            env: derive_seed(master, "env", trial),
            agent: derive_seed(master, algorithm, trial),
        }
    }
}

impl From<u64> for RunSeed {
    fn from(seed: u64) -> Self {
        Self {
            env: derive_seed(seed, "env", 0),
            agent: derive_seed(seed, "agent", 0),
        }
    }
}
