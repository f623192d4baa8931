//! Named random streams derived from one master seed.
//!
//! Every randomized procedure draws from a stream identified by a name (and
//! optionally a task index). Stream seeds are a hash of `(master, name)`, so
//! introducing a new stream never shifts the numbers another stream sees, and
//! parallel tasks produce the same draws regardless of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

pub fn derive_seed(master: u64, stream: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(stream.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stream(master: u64, name: &str) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, name))
}

/// Stream for the `index`-th task of a named parallel job.
pub fn task_stream(master: u64, name: &str, index: u64) -> StreamRng {
    stream(master, &format!("{name}#{index}"))
}
