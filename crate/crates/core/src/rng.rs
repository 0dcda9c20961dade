//! Counter-based seeding.
//!
//! Every random stream is addressed by a key path (master seed, then any
//! number of indices such as cell, iteration or replicate) plus a
//! [`Purpose`] tag. The path is folded through a SplitMix64 finalizer into a
//! ChaCha8 key and the purpose selects the ChaCha stream, so two streams share
//! nothing unless their full address is equal. Work can therefore be split
//! across any number of workers without changing a single draw.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// What a stream is used for; distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Data = 1,
    Permutation = 2,
    Bootstrap = 3,
    /// Seeds derived for a nested procedure (e.g. one test inside a Monte Carlo iteration).
    Seed = 4,
    Sampling = 5,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A position in the stream tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey(mix64(seed.wrapping_add(GOLDEN)))
    }

    /// Descends one level.
    #[must_use]
    pub fn child(self, index: u64) -> Self {
        StreamKey(mix64(self.0 ^ mix64(index.wrapping_add(GOLDEN).wrapping_mul(GOLDEN))))
    }

    /// A 64-bit seed for a nested procedure.
    pub fn derive_seed(self, purpose: Purpose) -> u64 {
        mix64(self.0 ^ (purpose as u64).wrapping_mul(GOLDEN))
    }

    pub fn rng(self, purpose: Purpose) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut state = self.0;
        for chunk in seed.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(purpose as u64);
        rng
    }
}

/// The stream for `(seed, index, purpose)`.
pub fn substream(seed: u64, index: u64, purpose: Purpose) -> ChaCha8Rng {
    StreamKey::new(seed).child(index).rng(purpose)
}

/// Uniform draw from `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..bound` (Lemire's nearly divisionless method).
#[inline]
pub fn uniform_index<R: RngCore + ?Sized>(rng: &mut R, bound: usize) -> usize {
    debug_assert!(bound > 0);
    let range = bound as u64;
    let mut m = u128::from(rng.next_u64()) * u128::from(range);
    let mut low = m as u64;
    if low < range {
        let threshold = range.wrapping_neg() % range;
        while low < threshold {
            m = u128::from(rng.next_u64()) * u128::from(range);
            low = m as u64;
        }
    }
    (m >> 64) as usize
}

/// Moves a uniformly random `amount`-subset of `slice` into its first
/// `amount` slots (partial Fisher-Yates).
pub fn partial_shuffle<T, R: RngCore + ?Sized>(slice: &mut [T], amount: usize, rng: &mut R) {
    let len = slice.len();
    for i in 0..amount.min(len) {
        let j = i + uniform_index(rng, len - i);
        slice.swap(i, j);
    }
}
