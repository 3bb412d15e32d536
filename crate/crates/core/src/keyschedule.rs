//! Key family derivation from a single master seed.
//!
//! Training keys `key(j, s)` for image `j` in `1..=g` and slot `s` in `1..=N`:
//!
//! ```text
//! key(j, s) = mix(master ^ mix(j) ^ mix(s << 32))
//! ```
//!
//! Every other stream is derived by tagged chaining,
//! `chain(tag, a, b) = mix(mix(mix(master ^ tag) ^ a) ^ b)`, with one tag per domain
//! (epoch selection, augmentation, test keys, attack keys). `mix` is one SplitMix64 step,
//! see [`crate::rng::mix`].

use crate::error::{Error, Result};
use crate::image::BlockSpec;
use crate::rng::{mix, DeterministicRng};
use crate::scramble::ScrambleKey;

/// Domain tags. ASCII mnemonics, fixed forever.
pub mod tags {
    pub const SELECT: u64 = u64::from_be_bytes(*b"sk/selct");
    pub const TRAIN_AUGMENT: u64 = u64::from_be_bytes(*b"sk/tr-au");
    pub const TEST_KEY: u64 = u64::from_be_bytes(*b"sk/te-ky");
    pub const TEST_AUGMENT: u64 = u64::from_be_bytes(*b"sk/te-au");
    pub const ATTACK_KEY: u64 = u64::from_be_bytes(*b"sk/at-ky");
}

pub const DEFAULT_KEYS_PER_IMAGE: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySet {
    master_seed: u64,
    images: usize,
    keys_per_image: usize,
}

/// The slot drawn for one image in one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpochSelection {
    pub epoch: u64,
    pub image: usize,
    /// 1-based slot in `1..=N`.
    pub chosen_s: usize,
}

impl KeySet {
    pub fn new(master_seed: u64, images: usize, keys_per_image: usize) -> Result<Self> {
        if keys_per_image == 0 {
            return Err(Error::contract(
                "a key set needs at least one key per image",
            ));
        }
        Ok(Self {
            master_seed,
            images,
            keys_per_image,
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn images(&self) -> usize {
        self.images
    }

    pub fn keys_per_image(&self) -> usize {
        self.keys_per_image
    }

    fn chain(&self, tag: u64, a: u64, b: u64) -> u64 {
        mix(mix(mix(self.master_seed ^ tag) ^ a) ^ b)
    }

    fn check_image(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.images {
            return Err(Error::contract(format!(
                "image index {j} outside 1..={}",
                self.images
            )));
        }
        Ok(())
    }

    /// `K_{j,s}`, both indices 1-based.
    pub fn derive_key(&self, j: usize, s: usize) -> Result<ScrambleKey> {
        self.check_image(j)?;
        if s == 0 || s > self.keys_per_image {
            return Err(Error::contract(format!(
                "key index {s} outside 1..={}",
                self.keys_per_image
            )));
        }
        let seed = mix(self.master_seed ^ mix(j as u64) ^ mix((s as u64) << 32));
        Ok(ScrambleKey(seed))
    }

    pub fn select_slot(&self, epoch: u64, j: usize) -> Result<EpochSelection> {
        self.check_image(j)?;
        let mut rng = DeterministicRng::new(self.chain(tags::SELECT, epoch, j as u64));
        let chosen_s = 1 + rng.below_usize(self.keys_per_image);
        Ok(EpochSelection {
            epoch,
            image: j,
            chosen_s,
        })
    }

    pub fn select_epoch_key(&self, epoch: u64, j: usize) -> Result<ScrambleKey> {
        let sel = self.select_slot(epoch, j)?;
        self.derive_key(j, sel.chosen_s)
    }

    /// Fresh `K_T` per test image. Distinct ids always give distinct keys since `mix`
    /// is a bijection.
    pub fn derive_test_key(&self, image_id: u64) -> ScrambleKey {
        ScrambleKey(mix(mix(self.master_seed ^ tags::TEST_KEY) ^ image_id))
    }

    /// RNG stream for augmenting training image `j` in `epoch`.
    pub fn training_augment_rng(&self, epoch: u64, j: usize) -> DeterministicRng {
        DeterministicRng::new(self.chain(tags::TRAIN_AUGMENT, epoch, j as u64))
    }

    pub fn test_augment_rng(&self, image_id: u64) -> DeterministicRng {
        DeterministicRng::new(self.chain(tags::TEST_AUGMENT, 0, image_id))
    }

    /// Key used when the attack harness scrambles image `index` at block size `spec`.
    pub fn derive_attack_key(&self, index: u64, spec: BlockSpec) -> ScrambleKey {
        let size = ((spec.block_width() as u64) << 32) | spec.block_height() as u64;
        ScrambleKey(self.chain(tags::ATTACK_KEY, size, index))
    }
}
