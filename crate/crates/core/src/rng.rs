//! SplitMix64, the single source of randomness for keys, shuffles and augmentation.
//!
//! The generator is pinned bit-for-bit so that any implementation, in any language,
//! reproduces the same permutations from the same seed:
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15
//! z      = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
//! z      = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! Bounded draws reject raw outputs `>= floor(2^64 / bound) * bound` and return the
//! accepted value `mod bound`.

use crate::error::{Error, Result};

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_MUL_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_MUL_2: u64 = 0x94D0_49BB_1331_11EB;

/// The SplitMix64 output finalizer.
#[inline]
pub const fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_MUL_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_MUL_2);
    z ^ (z >> 31)
}

/// One full SplitMix64 step from `x`: `finalize(x + GOLDEN_GAMMA)`.
///
/// Equal to the first output of a generator seeded with `x`. Used for key derivation.
#[inline]
pub const fn mix(x: u64) -> u64 {
    finalize(x.wrapping_add(GOLDEN_GAMMA))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicRng {
    state: u64,
}

impl DeterministicRng {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub const fn state(&self) -> u64 {
        self.state
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        finalize(self.state)
    }

    /// Uniform draw in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> Result<u64> {
        if bound == 0 {
            return Err(Error::contract("rng_below called with bound 0"));
        }
        Ok(self.below_nonzero(bound))
    }

    pub(crate) fn below_nonzero(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // floor(2^64 / bound) * bound, which is 2^64 itself for powers of two.
        let limit = (1u128 << 64) / bound as u128 * bound as u128;
        loop {
            let x = self.next_u64();
            if (x as u128) < limit {
                return x % bound;
            }
        }
    }

    pub(crate) fn below_usize(&mut self, bound: usize) -> usize {
        self.below_nonzero(bound as u64) as usize
    }

    /// Bernoulli trial: one `below(2^32)` draw compared against `p * 2^32`.
    ///
    /// Always consumes the draw, so the stream position does not depend on `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        let draw = self.below_nonzero(1 << 32);
        (draw as f64) < p * (1u64 << 32) as f64
    }
}

/// Pure form of [`DeterministicRng::next_u64`]: returns the output and the advanced generator.
pub fn rng_next_u64(rng: &DeterministicRng) -> (u64, DeterministicRng) {
    let mut next = rng.clone();
    let out = next.next_u64();
    (out, next)
}

/// Pure form of [`DeterministicRng::below`].
pub fn rng_below(rng: &DeterministicRng, bound: u64) -> Result<(u64, DeterministicRng)> {
    let mut next = rng.clone();
    let out = next.below(bound)?;
    Ok((out, next))
}
