//! Deterministic derivation of independent RNG streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with a sequence of words.
pub fn derive(seed: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(seed), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// Seed keyed by the bit pattern of a point, independent of its position in
/// any container.
pub fn derive_from_point(seed: u64, point: &[f64]) -> u64 {
    let mut acc = splitmix64(seed ^ point.len() as u64);
    for &v in point {
        // Treat -0.0 and 0.0 alike.
        let bits = if v == 0.0 { 0 } else { v.to_bits() };
        acc = splitmix64(acc ^ splitmix64(bits));
    }
    acc
}

pub fn rng(seed: u64, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, words))
}
