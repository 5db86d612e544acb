//! Counter-based random substreams keyed by `(seed, path, purpose, lane)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Purpose {
    Brownian = 1,
    Bridge = 2,
    KarhunenLoeve = 3,
    KarhunenLoeveTail = 4,
    Spectral = 5,
}

/// Independent stream for one path and purpose. Streams never depend on the
/// order in which paths are generated.
pub(crate) fn substream(seed: u64, path: u64, purpose: Purpose, lane: u64) -> ChaCha8Rng {
    debug_assert!(lane < 256 && path < (1 << 48));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((path << 16) | ((purpose as u64) << 8) | lane);
    rng
}

pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}
