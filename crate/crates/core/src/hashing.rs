//! Hashing of byte-string elements into the 64-bit values consumed by sketches.

/// Maps an element to a 64-bit hash. The estimators assume the output is
/// uniformly distributed.
pub trait ElementHasher {
    fn hash_bytes(&self, bytes: &[u8]) -> u64;
}

/// XXH3 64-bit hash with an optional seed. This is the default hasher.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Xxh3Hasher {
    seed: u64,
}

impl Xxh3Hasher {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed }
    }
}

impl ElementHasher for Xxh3Hasher {
    #[inline]
    fn hash_bytes(&self, bytes: &[u8]) -> u64 {
        xxhash_rust::xxh3::xxh3_64_with_seed(bytes, self.seed)
    }
}

impl<F: Fn(&[u8]) -> u64> ElementHasher for F {
    fn hash_bytes(&self, bytes: &[u8]) -> u64 {
        self(bytes)
    }
}
