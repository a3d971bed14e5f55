//! Seeded random streams.
//!
//! Every market draws from three independent ChaCha8 streams keyed by the
//! same 64-bit seed, so changing one parameter never shifts the draws used
//! by another part of the construction:
//!
//! * stream 0: initial prices, one log-normal draw per share in index order;
//! * stream 1: holdings, investors in index order, each sampled with Floyd's
//!   algorithm (`s` calls to `random_range(0..=j)` for `j` in `M-s..M`);
//! * stream 2: shock, one `random::<f64>()` per share in index order, scaled
//!   by `v / 100`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PRICE_STREAM: u64 = 0;
pub const HOLDINGS_STREAM: u64 = 1;
pub const SHOCK_STREAM: u64 = 2;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Replica seed for an experiment. Depends only on its three inputs.
pub fn derive_seed(master: u64, tag: u64, replica: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ tag) ^ replica)
}
