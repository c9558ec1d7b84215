//! Deterministic RNG streams keyed by (seed, operation id).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent reproducible stream for one (seed, operation) pair.
pub fn derive_rng(seed: u64, op_id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&op_id.to_le_bytes());
    key[16..24].copy_from_slice(&(seed ^ 0x9e37_79b9_7f4a_7c15).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
