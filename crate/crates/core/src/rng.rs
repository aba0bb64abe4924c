//! Counter-addressed random streams.
//!
//! A stream is identified by `(seed, purpose tag, index path)`. The identifier is
//! hashed with SHA-256 into a 256-bit ChaCha12 key, so distinct identifiers give
//! independent generators regardless of the order in which they are created.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Name recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha12 keyed by SHA-256(seed, tag, indices)";

pub type StreamRng = ChaCha12Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub purpose_tag: String,
    pub index: Vec<u64>,
}

impl RngStream {
    pub fn new(seed: u64, purpose_tag: &str, index: &[u64]) -> Self {
        Self {
            seed,
            purpose_tag: purpose_tag.to_string(),
            index: index.to_vec(),
        }
    }

    pub fn rng(&self) -> StreamRng {
        stream(self.seed, &self.purpose_tag, &self.index)
    }
}

pub fn stream(seed: u64, tag: &str, index: &[u64]) -> StreamRng {
    let mut h = Sha256::new();
    h.update(b"rig-stream-v1");
    h.update(seed.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update((index.len() as u64).to_le_bytes());
    for i in index {
        h.update(i.to_le_bytes());
    }
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}

/// Derives a child seed from a stream, used when a sub-computation takes a plain `u64`.
pub fn derive_seed(seed: u64, tag: &str, index: &[u64]) -> u64 {
    use rand::RngCore;
    stream(seed, tag, index).next_u64()
}
