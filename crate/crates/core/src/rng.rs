//! Deterministic random streams.
//!
//! Every stream is keyed by `(master seed, component label, replica index)`.
//! The seed and label are hashed into a ChaCha8 key and the replica index
//! selects the ChaCha stream, so replicas are independent and the result of
//! an ensemble does not depend on how replicas are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Builds the random stream for one replica of one component.
pub fn stream(master_seed: u64, label: &str, index: u64) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(b"rpwf-stream-v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
