//! Dataset ingestion, whole-epoch encryption and export.

mod cifar;
mod manifest;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

pub use cifar::{
    encode_record, load_cifar10, load_cifar10_many, parse_cifar10, write_cifar10, DatasetRecord,
    NUM_CLASSES, PIXEL_LEN, RECORD_LEN,
};
pub use manifest::{Manifest, ManifestEntry, Mode, FORMAT_VERSION, MAGIC};

use crate::augment::{augment_testing, augment_training, AugmentConfig};
use crate::error::{Error, Result};
use crate::image::{BlockSpec, Image};
use crate::keyschedule::KeySet;
use crate::pngio::write_png;
use crate::scramble::{scramble, ScrambleKey};

pub const BIN_FILE: &str = "encrypted.bin";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const PNG_DIR: &str = "images";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedRecord {
    pub image: Image,
    pub label: u8,
    pub source_index: usize,
    /// Key slot in `1..=N`, or 0 for a test key.
    pub s_used: usize,
    pub key: ScrambleKey,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExportFormat {
    #[default]
    Bin,
    Png,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bin" => Ok(ExportFormat::Bin),
            "png" => Ok(ExportFormat::Png),
            other => Err(format!("unknown format `{other}` (expected bin or png)")),
        }
    }
}

/// Image number `j` used for key derivation (1-based source position).
fn image_number(record: &DatasetRecord) -> usize {
    record.source_index + 1
}

/// Augments (unless `augment` is `None`) and scrambles one epoch of training images.
///
/// In [`Mode::Select`] image `j` is scrambled with the slot drawn for this epoch. In
/// [`Mode::Expand`] it is scrambled under every one of the `N` keys, in slot order.
/// Output order follows input order. The manifest's paths are filled in on export.
pub fn encrypt_training_epoch(
    records: &[DatasetRecord],
    keyset: &KeySet,
    epoch: u64,
    augment: Option<&AugmentConfig>,
    block_spec: BlockSpec,
    mode: Mode,
) -> Result<(Vec<EncryptedRecord>, Manifest)> {
    if mode == Mode::Test {
        return Err(Error::contract("test mode is handled by encrypt_test_set"));
    }
    if let Some(r) = records.iter().find(|r| image_number(r) > keyset.images()) {
        return Err(Error::contract(format!(
            "record {} is outside a key set of {} images",
            r.source_index,
            keyset.images()
        )));
    }
    let per_record: Vec<Vec<EncryptedRecord>> = records
        .par_iter()
        .map(|record| {
            let j = image_number(record);
            let image = match augment {
                Some(cfg) => {
                    let mut rng = keyset.training_augment_rng(epoch, j);
                    augment_training(&record.image, cfg, &mut rng)?
                }
                None => record.image.clone(),
            };
            let slots: Vec<usize> = match mode {
                Mode::Select => vec![keyset.select_slot(epoch, j)?.chosen_s],
                _ => (1..=keyset.keys_per_image()).collect(),
            };
            slots
                .into_iter()
                .map(|s| {
                    let key = keyset.derive_key(j, s)?;
                    Ok(EncryptedRecord {
                        image: scramble(&image, key, block_spec)?,
                        label: record.label,
                        source_index: record.source_index,
                        s_used: s,
                        key,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let encrypted: Vec<EncryptedRecord> = per_record.into_iter().flatten().collect();
    let manifest = build_manifest(&encrypted, mode, block_spec, epoch);
    Ok((encrypted, manifest))
}

/// Test-side encryption of one image: test augmentation (unless `None`), then scramble
/// under `K_T` for its source index.
pub fn encrypt_test(
    record: &DatasetRecord,
    keyset: &KeySet,
    augment: Option<&AugmentConfig>,
    block_spec: BlockSpec,
) -> Result<Image> {
    Ok(encrypt_test_record(record, keyset, augment, block_spec)?.image)
}

fn encrypt_test_record(
    record: &DatasetRecord,
    keyset: &KeySet,
    augment: Option<&AugmentConfig>,
    block_spec: BlockSpec,
) -> Result<EncryptedRecord> {
    let id = record.source_index as u64;
    let image = match augment {
        Some(cfg) => augment_testing(&record.image, cfg, &mut keyset.test_augment_rng(id))?,
        None => record.image.clone(),
    };
    let key = keyset.derive_test_key(id);
    Ok(EncryptedRecord {
        image: scramble(&image, key, block_spec)?,
        label: record.label,
        source_index: record.source_index,
        s_used: 0,
        key,
    })
}

pub fn encrypt_test_set(
    records: &[DatasetRecord],
    keyset: &KeySet,
    augment: Option<&AugmentConfig>,
    block_spec: BlockSpec,
) -> Result<(Vec<EncryptedRecord>, Manifest)> {
    let encrypted: Vec<EncryptedRecord> = records
        .par_iter()
        .map(|r| encrypt_test_record(r, keyset, augment, block_spec))
        .collect::<Result<_>>()?;
    let manifest = build_manifest(&encrypted, Mode::Test, block_spec, 0);
    Ok((encrypted, manifest))
}

fn build_manifest(
    encrypted: &[EncryptedRecord],
    mode: Mode,
    block_spec: BlockSpec,
    epoch: u64,
) -> Manifest {
    let mut manifest = Manifest::new(mode, block_spec, epoch);
    manifest.entries = encrypted
        .iter()
        .map(|r| ManifestEntry {
            source_index: r.source_index,
            label: r.label,
            s_used: r.s_used,
            path: String::new(),
            key: None,
        })
        .collect();
    manifest
}

/// Export settings beyond the format.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExportOptions {
    pub format: ExportFormat,
    /// Writes the master seed and per-record keys into the manifest.
    pub include_keys: Option<u64>,
}

pub fn png_name(record: &EncryptedRecord) -> String {
    format!(
        "{PNG_DIR}/{:06}_s{}.png",
        record.source_index, record.s_used
    )
}

/// Writes `encrypted.bin` (CIFAR record layout) or one PNG per record under `images/`,
/// followed by `manifest.txt`. Returns the manifest as written.
pub fn export_dataset(
    encrypted: &[EncryptedRecord],
    manifest: &Manifest,
    out_dir: impl AsRef<Path>,
    options: ExportOptions,
) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    if manifest.entries.len() != encrypted.len() {
        return Err(Error::contract(format!(
            "manifest has {} entries for {} records",
            manifest.entries.len(),
            encrypted.len()
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut written = manifest.clone();
    written.strip_keys();
    match options.format {
        ExportFormat::Bin => {
            let path = out_dir.join(BIN_FILE);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_cifar10(
                BufWriter::new(file),
                encrypted.iter().map(|r| (&r.image, r.label)),
            )
            .map_err(|e| Error::io(&path, e))?;
            for (k, entry) in written.entries.iter_mut().enumerate() {
                entry.path = format!("{BIN_FILE}#{k}");
            }
        }
        ExportFormat::Png => {
            let dir = out_dir.join(PNG_DIR);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let names: Vec<String> = encrypted.iter().map(png_name).collect();
            encrypted
                .par_iter()
                .zip(names.par_iter())
                .try_for_each(|(r, name)| write_png(out_dir.join(name), &r.image, &[]))?;
            for (entry, name) in written.entries.iter_mut().zip(names) {
                entry.path = name;
            }
        }
    }
    if let Some(seed) = options.include_keys {
        written.master_seed = Some(seed);
        for (entry, r) in written.entries.iter_mut().zip(encrypted) {
            entry.key = Some(r.key.seed());
        }
    }
    written.write(out_dir.join(MANIFEST_FILE))?;
    Ok(written)
}

/// Resolves a manifest `path` field relative to the export directory. Bin entries carry
/// a `#<record>` suffix.
pub fn resolve_entry_path(out_dir: &Path, entry: &ManifestEntry) -> (PathBuf, Option<usize>) {
    match entry.path.rsplit_once('#') {
        Some((file, rec)) => (out_dir.join(file), rec.parse().ok()),
        None => (out_dir.join(&entry.path), None),
    }
}
