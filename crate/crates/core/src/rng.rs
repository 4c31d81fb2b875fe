//! Per-trial random streams.
//!
//! Every trial draws from its own ChaCha stream keyed by `(master_seed,
//! purpose, indices)`, so results do not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream for the channel of trial `trial`; shared across sweep points so
/// that points are compared on identical channels.
pub fn channel_stream(master_seed: u64, trial: u64) -> ChaCha12Rng {
    stream(master_seed, 0x6368_616e, trial)
}

/// Stream for noise and frame bits at one sweep point of one trial.
pub fn trial_stream(master_seed: u64, point: u64, trial: u64) -> ChaCha12Rng {
    stream(master_seed, 0x6e6f_6973 ^ (point << 32), trial)
}

fn stream(master_seed: u64, purpose: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(splitmix(master_seed ^ splitmix(purpose)));
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer.
pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
