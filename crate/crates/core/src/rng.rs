use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic, platform-independent generator for a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
