//! Deterministic seed derivation.
//!
//! Every stochastic component draws from its own ChaCha stream keyed by
//! `hash(master_seed, component_path)`. Adding a component never shifts the
//! stream seen by another one, which is what keeps sweeps on common random
//! numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

pub fn derive_seed(master: u64, path: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(path.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn component_rng(master: u64, path: &str) -> SimRng {
    rng_from_seed(derive_seed(master, path))
}

/// Uniform draw in [0,1) fixed by `(seed, key)`; no stream state involved.
pub fn keyed_uniform(seed: u64, key: &str) -> f64 {
    (derive_seed(seed, key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
