//! Named random sub-streams derived from one global seed.

use sha2::{Digest, Sha256};

/// A seed for the stream `name` under `seed`. Streams with different names
/// are independent, so toggling one consumer never shifts another.
pub fn substream(seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}
