use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream keyed by a base seed and a stream index.
///
/// Streams are a pure function of `(seed, stream)`, so results do not depend
/// on which worker evaluates which stream.
pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
