//! Seed fan-out. One global seed is turned into independent per-stage and
//! per-item seeds through a labeled hash, so any stage can be rerun alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used everywhere in the crate. ChaCha keeps streams
/// stable across platforms and crate versions.
pub type Rng = ChaCha8Rng;

/// Derives a child seed from `seed` and a textual label.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(label.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Derives a child seed from `seed`, a label and an integer index.
pub fn derive_indexed(seed: u64, label: &str, index: u64) -> u64 {
    derive_seed(seed ^ index.rotate_left(29), &format!("{label}#{index}"))
}

pub fn rng_from(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn rng_for(seed: u64, label: &str) -> Rng {
    rng_from(derive_seed(seed, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_separate_streams() {
        assert_ne!(derive_seed(1, "sim"), derive_seed(1, "train"));
        assert_ne!(derive_seed(1, "sim"), derive_seed(2, "sim"));
        assert_eq!(derive_seed(7, "nas"), derive_seed(7, "nas"));
        assert_ne!(derive_indexed(7, "track", 0), derive_indexed(7, "track", 1));
    }
}
