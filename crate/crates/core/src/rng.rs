//! Reproducible per-replica random streams.
//!
//! A stream is identified by `(master_seed, label, index)`. The label and the
//! master seed select the ChaCha key, the index selects the ChaCha stream
//! number, so streams with different labels or indices never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha20Rng;

/// Record of where a stream came from; enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamId {
    pub master_seed: u64,
    pub label: String,
    pub index: u64,
}

impl StreamId {
    pub fn new(master_seed: u64, label: &str, index: u64) -> Self {
        StreamId {
            master_seed,
            label: label.to_string(),
            index,
        }
    }

    pub fn rng(&self) -> StreamRng {
        derive(self.master_seed, &self.label, self.index)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for replica `index` of the family `label`.
pub fn derive(master_seed: u64, label: &str, index: u64) -> StreamRng {
    let mut state = master_seed ^ fnv1a(label.as_bytes());
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
