//! Deterministic seed derivation.
//!
//! Every trial draws from its own `ChaCha8Rng`, seeded by mixing the master
//! seed, a stream tag (usually a hash of the experiment name) and the trial
//! index with SplitMix64. Results depend only on these three values, never
//! on the order in which trials finish.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The generator used for all simulated randomness.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 step: advance `state` and return the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a, used to turn experiment names into stream tags.
pub fn stream_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut state = master;
    let a = splitmix64(&mut state);
    state = a ^ stream;
    let b = splitmix64(&mut state);
    state = b ^ index;
    splitmix64(&mut state)
}

pub fn trial_rng(master: u64, stream: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream, index))
}

/// Evaluate `f(i)` for `i in 0..trials` in parallel, returned in index order.
pub fn run_trials<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}
