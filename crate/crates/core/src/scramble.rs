//! Keyed block scrambling.
//!
//! An image is cut into `Bx x By` pixel tiles in row-major order and the tiles are
//! permuted as whole units (every channel moves together). Slot `i` of the encrypted
//! image receives source tile `mapping[i]`.

use crate::error::{Error, Result};
use crate::image::{BlockGrid, BlockSpec, Image, Permutation};
use crate::rng::DeterministicRng;

/// A 64-bit scramble key. The seed drives [`permutation_from_key`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScrambleKey(pub u64);

impl ScrambleKey {
    pub fn seed(&self) -> u64 {
        self.0
    }
}

impl From<u64> for ScrambleKey {
    fn from(seed: u64) -> Self {
        Self(seed)
    }
}

pub fn partition(image: &Image, spec: BlockSpec) -> Result<BlockGrid> {
    BlockGrid::partition(image, spec)
}

/// Fisher-Yates shuffle of the identity on `0..n`, from `i = n-1` down to `1`,
/// swapping `i` with `rng_below(i + 1)`.
pub fn permutation_from_key(key: ScrambleKey, n: usize) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::contract("cannot permute zero blocks"));
    }
    let mut rng = DeterministicRng::new(key.seed());
    let mut mapping: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below_usize(i + 1);
        mapping.swap(i, j);
    }
    Ok(Permutation::from_mapping_unchecked(mapping))
}

/// Rearranges tiles so that output slot `i` holds input tile `perm[i]`.
pub fn apply_permutation(image: &Image, perm: &Permutation, spec: BlockSpec) -> Result<Image> {
    let grid = BlockGrid::partition(image, spec)?;
    if perm.len() != grid.len() {
        return Err(Error::contract(format!(
            "permutation of length {} applied to a grid of {} blocks",
            perm.len(),
            grid.len()
        )));
    }
    Ok(grid.assemble_with(|slot| perm.get(slot)))
}

pub fn scramble(image: &Image, key: ScrambleKey, spec: BlockSpec) -> Result<Image> {
    let shape = spec.check(image)?;
    let perm = permutation_from_key(key, shape.len())?;
    apply_permutation(image, &perm, spec)
}

pub fn descramble(image: &Image, key: ScrambleKey, spec: BlockSpec) -> Result<Image> {
    let shape = spec.check(image)?;
    let perm = permutation_from_key(key, shape.len())?;
    apply_permutation(image, &perm.inverse(), spec)
}
