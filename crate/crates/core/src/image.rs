//! Raster, block-grid and permutation types shared by every stage.

use crate::error::{Error, Result};

/// An 8-bit raster, row-major with interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::contract(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::contract(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        let expected = height * width * channels;
        if pixels.len() != expected {
            return Err(Error::contract(format!(
                "pixel buffer holds {} samples, {height}x{width}x{channels} needs {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            pixels,
        })
    }

    /// A constant image.
    pub fn filled(height: usize, width: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    pixels.push(f(y, x, c));
                }
            }
        }
        Self::new(height, width, channels, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    fn offset(&self, y: usize, x: usize) -> usize {
        (y * self.width + x) * self.channels
    }

    /// All channel samples of pixel `(y, x)`.
    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[u8] {
        let o = self.offset(y, x);
        &self.pixels[o..o + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, y: usize, x: usize) -> &mut [u8] {
        let o = self.offset(y, x);
        let c = self.channels;
        &mut self.pixels[o..o + c]
    }

    /// One pixel row, all channels.
    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        let stride = self.width * self.channels;
        &self.pixels[y * stride..(y + 1) * stride]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }
}

/// Block dimensions in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockSpec {
    bx: usize,
    by: usize,
}

impl BlockSpec {
    pub fn new(block_width: usize, block_height: usize) -> Result<Self> {
        if block_width == 0 || block_height == 0 {
            return Err(Error::contract(format!(
                "block dimensions must be positive, got {block_width}x{block_height}"
            )));
        }
        Ok(Self {
            bx: block_width,
            by: block_height,
        })
    }

    pub fn square(side: usize) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn block_width(&self) -> usize {
        self.bx
    }

    pub fn block_height(&self) -> usize {
        self.by
    }

    pub fn is_compatible(&self, image: &Image) -> bool {
        image.width().is_multiple_of(self.bx) && image.height().is_multiple_of(self.by)
    }

    pub fn check(&self, image: &Image) -> Result<GridShape> {
        if !self.is_compatible(image) {
            return Err(Error::IncompatibleBlockSpec {
                width: image.width(),
                height: image.height(),
                bx: self.bx,
                by: self.by,
            });
        }
        Ok(GridShape {
            rows: image.height() / self.by,
            cols: image.width() / self.bx,
        })
    }
}

impl Default for BlockSpec {
    fn default() -> Self {
        Self { bx: 8, by: 8 }
    }
}

/// Rows and columns of a block grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn coords(&self, slot: usize) -> (usize, usize) {
        (slot / self.cols, slot % self.cols)
    }

    #[inline]
    pub fn slot(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }
}

/// An image cut into equal tiles, enumerated in row-major grid order.
///
/// Each tile stores its pixels row-major with interleaved channels, exactly like an
/// [`Image`] of size `by x bx`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    spec: BlockSpec,
    shape: GridShape,
    channels: usize,
    blocks: Vec<Vec<u8>>,
}

impl BlockGrid {
    pub fn partition(image: &Image, spec: BlockSpec) -> Result<Self> {
        let shape = spec.check(image)?;
        let c = image.channels();
        let tile_row = spec.bx * c;
        let mut blocks = Vec::with_capacity(shape.len());
        for r in 0..shape.rows {
            for col in 0..shape.cols {
                let mut tile = Vec::with_capacity(spec.by * tile_row);
                for dy in 0..spec.by {
                    let row = image.row(r * spec.by + dy);
                    let start = col * tile_row;
                    tile.extend_from_slice(&row[start..start + tile_row]);
                }
                blocks.push(tile);
            }
        }
        Ok(Self {
            spec,
            shape,
            channels: c,
            blocks,
        })
    }

    /// Writes the tiles back in grid order. Inverse of [`BlockGrid::partition`].
    pub fn assemble(&self) -> Image {
        self.assemble_with(|slot| slot)
    }

    /// Builds an image whose grid slot `i` holds tile `source(i)`.
    pub(crate) fn assemble_with(&self, source: impl Fn(usize) -> usize) -> Image {
        let spec = self.spec;
        let c = self.channels;
        let width = self.shape.cols * spec.bx;
        let height = self.shape.rows * spec.by;
        let stride = width * c;
        let tile_row = spec.bx * c;
        let mut pixels = vec![0u8; height * stride];
        for slot in 0..self.shape.len() {
            let (r, col) = self.shape.coords(slot);
            let tile = &self.blocks[source(slot)];
            for dy in 0..spec.by {
                let dst = (r * spec.by + dy) * stride + col * tile_row;
                pixels[dst..dst + tile_row]
                    .copy_from_slice(&tile[dy * tile_row..(dy + 1) * tile_row]);
            }
        }
        Image::new(height, width, c, pixels).expect("grid dimensions are consistent")
    }

    pub fn spec(&self) -> BlockSpec {
        self.spec
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn rows(&self) -> usize {
        self.shape.rows
    }

    pub fn cols(&self) -> usize {
        self.shape.cols
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<u8>] {
        &self.blocks
    }

    pub fn block(&self, index: usize) -> &[u8] {
        &self.blocks[index]
    }
}

/// A bijection on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(Error::contract(format!(
                    "mapping is not a permutation of 0..{n}"
                )));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub(crate) fn from_mapping_unchecked(mapping: Vec<usize>) -> Self {
        debug_assert!(Self::from_mapping(mapping.clone()).is_ok());
        Self { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::contract(format!(
                "cannot compose permutations of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self {
            mapping: other.mapping.iter().map(|&i| self.mapping[i]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }
}
