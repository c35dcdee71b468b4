//! Random streams and deterministic seed derivation.
//!
//! Every run, branch and sweep cell owns a [`SimRng`] seeded from a 64-bit
//! value obtained by folding a path of integers into the master seed:
//!
//! ```text
//! s_0     = master
//! s_{k+1} = splitmix64(s_k XOR splitmix64(path[k]))
//! ```
//!
//! `splitmix64` is the standard finalizer (increment `0x9E3779B97F4A7C15`,
//! multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`, shifts 30/27/31).
//! The resulting seed feeds `ChaCha8Rng::seed_from_u64`. Uniform variates are
//! `f64` values in `[0, 1)` taken from the high 53 bits of one `u64` draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(master, |s, &component| splitmix64(s ^ splitmix64(component)))
}

pub fn stream(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
