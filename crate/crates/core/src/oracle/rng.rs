//! Reproducible random streams.
//!
//! Every trial owns an independent ChaCha8 stream: the 64-bit seed is
//! expanded into the key and the trial index selects the stream number, so
//! results do not depend on how trials are spread over worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
