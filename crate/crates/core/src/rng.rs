//! Counter-based seeding. Every random draw in the crate comes from a ChaCha
//! stream selected by `(seed, stream)`, optionally positioned at a slot, so
//! results never depend on scheduling or iteration order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream reserved for the condenser's random projection.
pub(crate) const EMBEDDING_STREAM: u64 = u64::MAX;
/// Stream reserved for the train/test split in the pipeline.
pub(crate) const SPLIT_STREAM: u64 = u64::MAX - 1;
/// Stream reserved for model weight initialisation.
pub(crate) const MODEL_INIT_STREAM: u64 = u64::MAX - 2;

/// 32-bit ChaCha words reserved per slot.
const WORDS_PER_SLOT: u128 = 64;

pub fn keyed_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn slot_rng(seed: u64, stream: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = keyed_rng(seed, stream);
    rng.set_word_pos(slot as u128 * WORDS_PER_SLOT);
    rng
}
