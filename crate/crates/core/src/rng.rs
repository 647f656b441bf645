//! Reproducible per-trial random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha8 stream: the cipher key
//! is derived once from the root seed and the 64-bit stream id is the trial
//! index. Trial `i` therefore sees the same bytes no matter how trials are
//! scheduled across threads, which is what makes estimates bit-reproducible
//! under any worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Expand a 64-bit root seed into a ChaCha key.
pub fn stream_key(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// The stream for one trial; restarting with the same `(key, trial)` replays
/// the identical byte sequence.
#[inline]
pub fn trial_rng(key: &[u8; 32], trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(trial);
    rng
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
