//! Seeded, schedule-independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stream for the task addressed by `path` under `seed`. Distinct paths give
/// independent streams regardless of which thread runs the task.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for (depth, &x) in path.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(x.wrapping_add((depth as u64 + 1) << 56)));
    }
    ChaCha8Rng::seed_from_u64(h)
}
