//! Reproducible random streams.
//!
//! Every Monte Carlo task owns a ChaCha8 generator seeded by hashing the
//! master seed together with a key such as `(experiment, model, n, delta,
//! replicate)`. Streams depend only on the key, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a label, for string-valued key parts.
pub fn label(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Key part for a real parameter such as a deviation weight.
pub fn real_key(x: f64) -> u64 {
    x.to_bits()
}

pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &p in parts {
        s = splitmix64(s ^ splitmix64(p));
    }
    s
}

pub fn stream(master: u64, parts: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(master, parts))
}
