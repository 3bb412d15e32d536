//! Training- and test-time augmentation applied before scrambling.
//!
//! Every operation draws from a caller-supplied [`DeterministicRng`] in a fixed order,
//! so outputs are a pure function of `(image, config, seed)`.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::DeterministicRng;

#[derive(Clone, Debug, PartialEq)]
pub struct GridMaskConfig {
    /// Smallest grid period in pixels.
    pub d_min: usize,
    /// Largest grid period in pixels.
    pub d_max: usize,
    /// Fraction of each period left unmasked along one axis.
    pub keep_ratio: f64,
    pub fill_value: u8,
    pub apply_probability: f64,
}

impl Default for GridMaskConfig {
    fn default() -> Self {
        Self {
            d_min: 16,
            d_max: 32,
            keep_ratio: 0.6,
            fill_value: 0,
            apply_probability: 0.5,
        }
    }
}

impl GridMaskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_min == 0 || self.d_min > self.d_max {
            return Err(Error::contract(format!(
                "gridmask period range must satisfy 1 <= d_min <= d_max, got [{}, {}]",
                self.d_min, self.d_max
            )));
        }
        if !(self.keep_ratio > 0.0 && self.keep_ratio < 1.0) {
            return Err(Error::contract(format!(
                "gridmask keep ratio must lie in (0, 1), got {}",
                self.keep_ratio
            )));
        }
        check_probability("gridmask apply probability", self.apply_probability)
    }

    /// Side of the masked square for period `d`.
    pub fn mask_side(&self, d: usize) -> usize {
        (((1.0 - self.keep_ratio) * d as f64).round() as usize).clamp(1, d)
    }
}

/// How test images are cropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TestCrop {
    /// Random crop and random flip, like training minus GridMask.
    #[default]
    Random,
    /// Center crop and no flip.
    Center,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentConfig {
    pub crop_padding: usize,
    pub crop_out_h: usize,
    pub crop_out_w: usize,
    pub flip_probability: f64,
    pub gridmask: GridMaskConfig,
    pub apply_gridmask: bool,
    pub test_crop: TestCrop,
}

impl AugmentConfig {
    /// Padding 4, 32x32 crop, flip 0.5, GridMask on.
    pub fn cifar_training() -> Self {
        Self {
            crop_padding: 4,
            crop_out_h: 32,
            crop_out_w: 32,
            flip_probability: 0.5,
            gridmask: GridMaskConfig::default(),
            apply_gridmask: true,
            test_crop: TestCrop::Random,
        }
    }

    /// Training settings without GridMask.
    pub fn cifar_testing() -> Self {
        Self {
            apply_gridmask: false,
            ..Self::cifar_training()
        }
    }

    /// A configuration that leaves `h x w` images untouched.
    pub fn disabled(h: usize, w: usize) -> Self {
        Self {
            crop_padding: 0,
            crop_out_h: h,
            crop_out_w: w,
            flip_probability: 0.0,
            gridmask: GridMaskConfig {
                apply_probability: 0.0,
                ..GridMaskConfig::default()
            },
            apply_gridmask: false,
            test_crop: TestCrop::Random,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("flip probability", self.flip_probability)?;
        if self.crop_out_h == 0 || self.crop_out_w == 0 {
            return Err(Error::contract("crop output must be at least 1x1"));
        }
        self.gridmask.validate()
    }
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self::cifar_training()
    }
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::contract(format!(
            "{what} must lie in [0, 1], got {p}"
        )))
    }
}

fn check_crop(image: &Image, padding: usize, out_h: usize, out_w: usize) -> Result<(usize, usize)> {
    let padded_h = image.height() + 2 * padding;
    let padded_w = image.width() + 2 * padding;
    if out_h == 0 || out_w == 0 || out_h > padded_h || out_w > padded_w {
        return Err(Error::contract(format!(
            "crop {out_w}x{out_h} does not fit a {padded_w}x{padded_h} padded image"
        )));
    }
    Ok((padded_h - out_h + 1, padded_w - out_w + 1))
}

/// Window of the zero-padded image starting at padded coordinates `(oy, ox)`.
fn crop_at(
    image: &Image,
    padding: usize,
    out_h: usize,
    out_w: usize,
    oy: usize,
    ox: usize,
) -> Image {
    let c = image.channels();
    let mut out = Image::filled(out_h, out_w, c, 0).expect("validated crop size");
    for y in 0..out_h {
        let sy = (oy + y)
            .checked_sub(padding)
            .filter(|&sy| sy < image.height());
        let Some(sy) = sy else { continue };
        for x in 0..out_w {
            if let Some(sx) = (ox + x)
                .checked_sub(padding)
                .filter(|&sx| sx < image.width())
            {
                out.pixel_mut(y, x).copy_from_slice(image.pixel(sy, sx));
            }
        }
    }
    out
}

/// Zero-pads by `padding` on every side and extracts a uniformly placed `out_h x out_w`
/// window. The row offset is drawn before the column offset.
pub fn random_crop(
    image: &Image,
    padding: usize,
    out_h: usize,
    out_w: usize,
    rng: &mut DeterministicRng,
) -> Result<Image> {
    let (span_y, span_x) = check_crop(image, padding, out_h, out_w)?;
    let oy = rng.below_usize(span_y);
    let ox = rng.below_usize(span_x);
    Ok(crop_at(image, padding, out_h, out_w, oy, ox))
}

pub fn center_crop(image: &Image, padding: usize, out_h: usize, out_w: usize) -> Result<Image> {
    let (span_y, span_x) = check_crop(image, padding, out_h, out_w)?;
    Ok(crop_at(
        image,
        padding,
        out_h,
        out_w,
        (span_y - 1) / 2,
        (span_x - 1) / 2,
    ))
}

/// Mirrors columns: column `j` moves to `W - 1 - j`.
pub fn mirror(image: &Image) -> Image {
    let w = image.width();
    let mut out = image.clone();
    for y in 0..image.height() {
        for x in 0..w {
            out.pixel_mut(y, x)
                .copy_from_slice(image.pixel(y, w - 1 - x));
        }
    }
    out
}

pub fn horizontal_flip(
    image: &Image,
    probability: f64,
    rng: &mut DeterministicRng,
) -> Result<Image> {
    check_probability("flip probability", probability)?;
    Ok(if rng.chance(probability) {
        mirror(image)
    } else {
        image.clone()
    })
}

/// Periodic square masking.
///
/// With probability `apply_probability`: period `d` in `[d_min, d_max]`, mask side
/// `l = round((1 - r) d)` (at least 1), offsets `dy`, `dx` in `[0, d)`. Pixel `(y, x)` is
/// filled when `(y - dy) mod d < l` and `(x - dx) mod d < l`.
pub fn gridmask(image: &Image, cfg: &GridMaskConfig, rng: &mut DeterministicRng) -> Result<Image> {
    cfg.validate()?;
    if !rng.chance(cfg.apply_probability) {
        return Ok(image.clone());
    }
    let d = cfg.d_min + rng.below_usize(cfg.d_max - cfg.d_min + 1);
    let l = cfg.mask_side(d);
    let dy = rng.below_usize(d);
    let dx = rng.below_usize(d);
    // (y - dy) mod d without going negative
    let masked = |v: usize, off: usize| (v + d - off) % d < l;
    let mut out = image.clone();
    for y in (0..image.height()).filter(|&y| masked(y, dy)) {
        for x in (0..image.width()).filter(|&x| masked(x, dx)) {
            out.pixel_mut(y, x).fill(cfg.fill_value);
        }
    }
    Ok(out)
}

/// Crop, then flip, then GridMask.
pub fn augment_training(
    image: &Image,
    cfg: &AugmentConfig,
    rng: &mut DeterministicRng,
) -> Result<Image> {
    if !cfg.apply_gridmask {
        return Err(Error::contract(
            "training augmentation requires apply_gridmask = true",
        ));
    }
    cfg.validate()?;
    let out = random_crop(image, cfg.crop_padding, cfg.crop_out_h, cfg.crop_out_w, rng)?;
    let out = horizontal_flip(&out, cfg.flip_probability, rng)?;
    gridmask(&out, &cfg.gridmask, rng)
}

/// Crop, then flip. No GridMask at test time.
pub fn augment_testing(
    image: &Image,
    cfg: &AugmentConfig,
    rng: &mut DeterministicRng,
) -> Result<Image> {
    if cfg.apply_gridmask {
        return Err(Error::contract(
            "test augmentation requires apply_gridmask = false",
        ));
    }
    cfg.validate()?;
    match cfg.test_crop {
        TestCrop::Random => {
            let out = random_crop(image, cfg.crop_padding, cfg.crop_out_h, cfg.crop_out_w, rng)?;
            horizontal_flip(&out, cfg.flip_probability, rng)
        }
        TestCrop::Center => center_crop(image, cfg.crop_padding, cfg.crop_out_h, cfg.crop_out_w),
    }
}

/// `(image, mirrored image)` for flip test-time augmentation.
pub fn test_time_flip_pair(image: &Image) -> (Image, Image) {
    (image.clone(), mirror(image))
}
