//! Synthetic recordings and brute-force reference implementations shared by the
//! test suites. Nothing here calls the code under test except to build inputs.

pub mod fixtures;
pub mod oracles;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
