//! Seeded random streams.
//!
//! Every consumer of randomness in a run draws from its own ChaCha stream keyed by
//! the run seed, so enabling one source (say, read noise) never perturbs another
//! (say, the initial centroid draw).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

/// Independent streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 0,
    Shuffle = 1,
    ReadNoise = 2,
    WriteNoise = 3,
    Synthetic = 4,
    KMeans = 5,
    Sampling = 6,
}

pub fn stream(seed: u64, which: Stream) -> RunRng {
    substream(seed, which as u64)
}

/// Stream `id` of `seed`; ids below 16 are reserved for [`Stream`].
pub fn substream(seed: u64, id: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
