//! Stable sub-seed derivation.
//!
//! A single master seed fans out to every random decision in a run by
//! hashing `(seed, purpose, index)`. The mixing is SplitMix64 over an
//! FNV-1a digest of the purpose tag, so values never depend on the Rust
//! version, the platform, or the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed for `purpose` and `index` from a master seed.
pub fn derive_seed(master: u64, purpose: &str, index: u64) -> u64 {
    let mut tag = FNV_OFFSET;
    for b in purpose.bytes() {
        tag ^= u64::from(b);
        tag = tag.wrapping_mul(FNV_PRIME);
    }
    splitmix(splitmix(master ^ tag).wrapping_add(index))
}

/// Deterministic generator for a derived sub-seed.
pub fn rng_for(master: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, purpose, index))
}
