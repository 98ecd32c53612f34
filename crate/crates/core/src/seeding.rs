//! Keyed random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream whose
//! 256-bit key is the SHA-256 digest of `(master seed, tag, index)`. Streams
//! with distinct keys are independent for all practical purposes, and the
//! derivation does not depend on platform, thread count or call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// Derive a 64-bit sub-seed from a master seed, a tag and an index.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let key = key_bytes(master, tag, index);
    u64::from_le_bytes(key[..8].try_into().expect("digest has 32 bytes"))
}

/// Independent stream keyed by `(master, tag, index)`.
pub fn stream(master: u64, tag: &str, index: u64) -> Stream {
    ChaCha8Rng::from_seed(key_bytes(master, tag, index))
}

fn key_bytes(master: u64, tag: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}
