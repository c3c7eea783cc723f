//! Deterministic random-number plumbing.
//!
//! Every stochastic step in this crate (subset sampling, tie breaking,
//! bootstrap resampling, synthetic data generation) draws from its own
//! stream, derived from a root seed plus a small tuple of task ids.
//! Streams are derived statelessly, so the draws a task sees depend only
//! on `(seed, task ids)` — never on scheduling, thread count, or the
//! order in which other tasks asked for their streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-task random generator handed out by [`RandomSource`].
pub type TaskRng = ChaCha8Rng;

/// A root seed from which per-task random streams are derived.
///
/// ```
/// use survey_equivalence::rng::RandomSource;
/// use rand::RngCore;
///
/// let source = RandomSource::new(7);
/// let a: u64 = source.stream(&[1, 2]).next_u64();
/// let b: u64 = source.stream(&[1, 2]).next_u64();
/// assert_eq!(a, b); // same task ids, same draws
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSource {
    seed: u64,
}

impl RandomSource {
    /// Creates a source rooted at `seed`.
    pub fn new(seed: u64) -> Self {
        RandomSource { seed }
    }

    /// The root seed this source was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives the random stream for the task identified by `ids`.
    ///
    /// Identical `(seed, ids)` always produce identical draws, on every
    /// platform and regardless of how many other streams were derived
    /// first.
    pub fn stream(&self, ids: &[u64]) -> TaskRng {
        let mut state = mix(self.seed ^ 0x6a09_e667_f3bc_c909);
        for &id in ids {
            state = mix(state ^ mix(id));
        }
        state = mix(state ^ ids.len() as u64);

        let mut key = [0u8; 32];
        let mut s = state;
        for chunk in key.chunks_exact_mut(8) {
            s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&finalize(s).to_le_bytes());
        }
        TaskRng::from_seed(key)
    }
}

/// Stable 64-bit hash of an item id, used to key per-item streams so that
/// reordering the items of a matrix does not reassign their streams.
pub fn stable_id_hash(id: &str) -> u64 {
    // FNV-1a, then one avalanche round so similar ids diverge fully.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in id.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    finalize(h)
}

/// Task-id tags, one per purpose, so streams for different purposes can
/// never collide even with equal numeric ids.
pub(crate) mod task {
    /// Rater-subset sampling: `(SUBSETS, sample, k)`.
    pub const SUBSETS: u64 = 1;
    /// Combiner tie-breaking: `(TIE, sample, k, subset, item)`.
    pub const TIE: u64 = 2;
    /// Bootstrap item resampling: `(BOOT, sample)`.
    pub const BOOT: u64 = 3;
    /// Reference-subset sampling for plurality references: `(REF_SUBSETS, sample, k)`.
    pub const REF_SUBSETS: u64 = 4;
    /// Tie-breaking inside a plurality reference: `(REF_TIE, sample, k, subset, ref_subset, item)`.
    pub const REF_TIE: u64 = 5;
    /// Synthetic data generation: `(GEN, item)`.
    pub const GEN: u64 = 6;
    /// Cross-group subset plans: `(CROSS, k)`.
    pub const CROSS: u64 = 7;
}

fn mix(x: u64) -> u64 {
    finalize(x.wrapping_add(0x9e37_79b9_7f4a_7c15))
}

// splitmix64 finalizer.
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
