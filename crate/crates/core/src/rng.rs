//! Counter-based random streams.
//!
//! Every consumer of randomness gets its own ChaCha stream keyed by
//! `(master seed, domain, index)`. A realization or bootstrap resample always
//! reads the same stream whichever worker thread processes it, so results do
//! not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains used inside the crate.
pub mod domain {
    pub const ENSEMBLE: u64 = 1;
    pub const BOOTSTRAP: u64 = 2;
    pub const COUNTING: u64 = 3;
    pub const SAMPLER: u64 = 4;
}

pub fn stream_rng(master_seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..].copy_from_slice(b"specklenoise/v1\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
