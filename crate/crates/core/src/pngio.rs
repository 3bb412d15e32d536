//! Lossless PNG reading and writing for 8-bit grayscale and RGB images.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// Decoded image plus its `tEXt` chunks.
#[derive(Clone, Debug)]
pub struct PngImage {
    pub image: Image,
    pub text: Vec<(String, String)>,
}

impl PngImage {
    pub fn text_value(&self, keyword: &str) -> Option<&str> {
        self.text
            .iter()
            .find(|(k, _)| k == keyword)
            .map(|(_, v)| v.as_str())
    }
}

pub fn read_png(path: impl AsRef<Path>) -> Result<PngImage> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decode_err = |source| Error::PngDecode {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = png::Decoder::new(BufReader::new(file))
        .read_info()
        .map_err(decode_err)?;
    let (color, depth) = (reader.info().color_type, reader.info().bit_depth);
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::UnsupportedImage {
                path: path.to_path_buf(),
                reason: format!("color type {other:?}, expected 8-bit grayscale or RGB"),
            })
        }
    };
    if depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedImage {
            path: path.to_path_buf(),
            reason: format!("bit depth {depth:?}, expected 8"),
        });
    }
    let text = reader
        .info()
        .uncompressed_latin1_text
        .iter()
        .map(|t| (t.keyword.clone(), t.text.clone()))
        .collect();
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let frame = reader.next_frame(&mut buf).map_err(decode_err)?;
    buf.truncate(frame.buffer_size());
    let image =
        Image::new(frame.height as usize, frame.width as usize, channels, buf).map_err(|e| {
            Error::UnsupportedImage {
                path: path.to_path_buf(),
                reason: e.to_string(),
            }
        })?;
    Ok(PngImage { image, text })
}

pub fn write_png(path: impl AsRef<Path>, image: &Image, text: &[(&str, &str)]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let encode_err = |source| Error::PngEncode {
        path: path.to_path_buf(),
        source,
    };
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        image.width() as u32,
        image.height() as u32,
    );
    encoder.set_color(if image.channels() == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    for (k, v) in text {
        encoder
            .add_text_chunk(k.to_string(), v.to_string())
            .map_err(encode_err)?;
    }
    let mut writer = encoder.write_header().map_err(encode_err)?;
    writer
        .write_image_data(image.pixels())
        .map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}
