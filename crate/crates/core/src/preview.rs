//! Side-by-side montages: one row per image, original on the left and encrypted on the
//! right, separated by a light gutter.

use crate::error::{Error, Result};
use crate::image::Image;

pub const GUTTER: usize = 2;
pub const GUTTER_VALUE: u8 = 255;

pub fn montage(pairs: &[(Image, Image)]) -> Result<Image> {
    let (first, _) = pairs
        .first()
        .ok_or_else(|| Error::contract("montage needs at least one image pair"))?;
    let (h, w, c) = (first.height(), first.width(), first.channels());
    if pairs
        .iter()
        .any(|(a, b)| !a.same_shape(first) || !b.same_shape(first))
    {
        return Err(Error::contract("montage images must share one shape"));
    }
    let out_w = 2 * w + 3 * GUTTER;
    let out_h = pairs.len() * (h + GUTTER) + GUTTER;
    let mut out = Image::filled(out_h, out_w, c, GUTTER_VALUE)?;
    for (i, (orig, enc)) in pairs.iter().enumerate() {
        let top = GUTTER + i * (h + GUTTER);
        for (img, left) in [(orig, GUTTER), (enc, 2 * GUTTER + w)] {
            for y in 0..h {
                for x in 0..w {
                    out.pixel_mut(top + y, left + x)
                        .copy_from_slice(img.pixel(y, x));
                }
            }
        }
    }
    Ok(out)
}
