//! CIFAR-10 binary batches: repeated 3073-byte records of one label byte followed by
//! 1024 red, 1024 green and 1024 blue samples, each plane row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

pub const SIDE: usize = 32;
pub const PLANE_LEN: usize = SIDE * SIDE;
pub const PIXEL_LEN: usize = 3 * PLANE_LEN;
pub const RECORD_LEN: usize = 1 + PIXEL_LEN;
pub const NUM_CLASSES: u8 = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetRecord {
    pub image: Image,
    pub label: u8,
    /// Position in the source file (or in the concatenation of several files).
    pub source_index: usize,
}

pub fn load_cifar10(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_cifar10(&bytes, 0).map_err(|e| match e {
        Error::MalformedDataset(msg) => {
            Error::MalformedDataset(format!("{}: {msg}", path.display()))
        }
        other => other,
    })
}

/// Loads several batch files back to back; source indices keep counting across files.
pub fn load_cifar10_many<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<DatasetRecord>> {
    let mut out = Vec::new();
    for path in paths {
        let first = out.len();
        let mut records = load_cifar10(path)?;
        for r in &mut records {
            r.source_index += first;
        }
        out.append(&mut records);
    }
    Ok(out)
}

pub fn parse_cifar10(bytes: &[u8], first_index: usize) -> Result<Vec<DatasetRecord>> {
    if !bytes.len().is_multiple_of(RECORD_LEN) {
        return Err(Error::MalformedDataset(format!(
            "size {} is not a multiple of the {RECORD_LEN}-byte record length",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(RECORD_LEN)
        .enumerate()
        .map(|(i, rec)| {
            let label = rec[0];
            if label >= NUM_CLASSES {
                return Err(Error::MalformedDataset(format!(
                    "record {i} has label {label}, expected < {NUM_CLASSES}"
                )));
            }
            Ok(DatasetRecord {
                image: planar_to_image(&rec[1..]),
                label,
                source_index: first_index + i,
            })
        })
        .collect()
}

fn planar_to_image(planes: &[u8]) -> Image {
    let mut pixels = Vec::with_capacity(PIXEL_LEN);
    for p in 0..PLANE_LEN {
        pixels.extend([planes[p], planes[PLANE_LEN + p], planes[2 * PLANE_LEN + p]]);
    }
    Image::new(SIDE, SIDE, 3, pixels).expect("fixed CIFAR geometry")
}

/// One 3073-byte record. The image must be 32x32x3.
pub fn encode_record(image: &Image, label: u8) -> Result<[u8; RECORD_LEN]> {
    if image.height() != SIDE || image.width() != SIDE || image.channels() != 3 {
        return Err(Error::contract(format!(
            "CIFAR records hold 32x32x3 images, got {}x{}x{}",
            image.width(),
            image.height(),
            image.channels()
        )));
    }
    if label >= NUM_CLASSES {
        return Err(Error::contract(format!(
            "label {label} is not a CIFAR-10 class"
        )));
    }
    let mut out = [0u8; RECORD_LEN];
    out[0] = label;
    for (p, px) in image.pixels().chunks_exact(3).enumerate() {
        out[1 + p] = px[0];
        out[1 + PLANE_LEN + p] = px[1];
        out[1 + 2 * PLANE_LEN + p] = px[2];
    }
    Ok(out)
}

pub fn write_cifar10<'a, W: Write>(
    mut writer: W,
    records: impl IntoIterator<Item = (&'a Image, u8)>,
) -> std::io::Result<()> {
    for (image, label) in records {
        let rec = encode_record(image, label)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
        writer.write_all(&rec)?;
    }
    writer.flush()
}
