use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent deterministic stream `index` of `seed`, so parallel samples
/// do not depend on scheduling.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
