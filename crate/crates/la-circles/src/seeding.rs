//! Deterministic sub-seed derivation so one user seed drives the sampling,
//! candidate-generation and selection streams independently.

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for an independent stream from a base seed.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ() {
        let s = derive_seed(42, 0);
        assert_ne!(s, derive_seed(42, 1));
        assert_ne!(s, derive_seed(43, 0));
        assert_eq!(s, derive_seed(42, 0));
    }
}
