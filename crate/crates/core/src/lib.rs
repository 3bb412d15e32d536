//! Block-scrambling image encryption for privacy-preserving training pipelines.
//!
//! Images are augmented (random crop, horizontal flip, GridMask), cut into equal pixel
//! blocks and the blocks are permuted under a per-image key derived from one master
//! seed. The crate also ingests and exports CIFAR-10 binary batches and measures how
//! much a greedy jigsaw solver recovers from scrambled images.
//!
//! The attack harness is generic over its cost scalar (`u64`, `f32`, `f64`) and metric
//! scalar (`f32`, `f64`); the aliases below fix the common choices.

pub mod attack;
pub mod augment;
pub mod dataset;
pub mod error;
pub mod image;
pub mod keyschedule;
pub mod pngio;
pub mod preview;
pub mod rng;
pub mod scalar;
pub mod scramble;

pub use crate::augment::{AugmentConfig, GridMaskConfig, TestCrop};
pub use crate::error::{Error, Result};
pub use crate::image::{BlockGrid, BlockSpec, GridShape, Image, Permutation};
pub use crate::keyschedule::{EpochSelection, KeySet};
pub use crate::rng::DeterministicRng;
pub use crate::scramble::{descramble, permutation_from_key, scramble, ScrambleKey};

/// Exact integer boundary costs.
pub type CostMatrix = attack::DissimilarityMatrix<u64>;
pub type CostMatrixF32 = attack::DissimilarityMatrix<f32>;
pub type CostMatrixF64 = attack::DissimilarityMatrix<f64>;

pub type Assembly = attack::Assembly<u64>;

pub type AttackReport = attack::AttackReport<f64>;
pub type AttackReportF32 = attack::AttackReport<f32>;

pub type SweepRow = attack::SweepRow<f64>;
