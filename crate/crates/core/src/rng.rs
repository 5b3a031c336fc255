//! Deterministic per-realization random streams.
//!
//! Realization `i` of a run seeded with `master` gets two independent ChaCha8
//! streams: `2i` drives the circuit skeleton (gate choices and event
//! locations) and `2i + 1` drives measurement outcomes. Keeping them apart
//! lets different simulation modes share the same realizations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn skeleton_rng(master: u64, realization: u64) -> ChaCha8Rng {
    stream(master, 2 * realization)
}

pub fn outcome_rng(master: u64, realization: u64) -> ChaCha8Rng {
    stream(master, 2 * realization + 1)
}

fn stream(master: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

/// A seed derived from `master` for an auxiliary purpose labelled `tag`.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(tag);
    rng.next_u64()
}
