//! Counter-based random streams derived from a single master seed.
//!
//! A stream is addressed by a path of integers (cell index, replicate index,
//! ...). The path prefix is mixed into the ChaCha key and the final element
//! selects the ChaCha stream, so every replicate gets an independent sequence
//! no matter which thread evaluates it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `path` under `master`.
pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    let (last, prefix) = match path.split_last() {
        Some((l, p)) => (*l, p),
        None => (0, &[][..]),
    };
    let mut key = splitmix64(master);
    for &p in prefix {
        key = splitmix64(key ^ splitmix64(p.wrapping_add(0xA5A5_A5A5)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(last);
    rng
}
