//! Seeded random streams.
//!
//! Every campaign phase draws from its own ChaCha stream, addressed by
//! `(seed, phase, iteration)`. A phase can therefore be replayed without
//! touching any other phase, and resuming a campaign only needs the seed and
//! the iteration counter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Phase {
    Init = 1,
    SurrogateFit = 2,
    Training = 3,
    TrainingRetry = 4,
    Candidates = 5,
    Baseline = 6,
    Export = 7,
}

pub fn stream(seed: u64, phase: Phase, iteration: usize) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iteration as u64) << 8) | phase as u64);
    rng
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
