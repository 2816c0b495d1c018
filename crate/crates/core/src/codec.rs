//! Decoding bit-encoded label rasters into per-pixel label sets.

use std::fmt;
use std::io::Cursor;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{DynamicImage, ImageFormat, RgbImage};

use crate::error::{Dimensions, Error, Result};
use crate::registry::ClassRegistry;

/// Set of classes attached to one pixel, stored as a bitmask over class
/// indices (bit `i` is the i-th class of the registry).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelSet(u32);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn single(class: usize) -> Self {
        Self(1 << class)
    }

    pub fn contains(self, class: usize) -> bool {
        self.0 >> class & 1 == 1
    }

    pub fn insert(&mut self, class: usize) {
        self.0 |= 1 << class;
    }

    pub fn remove(&mut self, class: usize) {
        self.0 &= !(1 << class);
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Classes in either set but not both.
    pub fn symmetric_difference(self, other: Self) -> Self {
        Self(self.0 ^ other.0)
    }

    /// Class indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        })
    }
}

impl FromIterator<usize> for LabelSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut set = Self::EMPTY;
        for class in iter {
            set.insert(class);
        }
        set
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Which side of the comparison an image is. Ground truth pixels must carry
/// at least one label; prediction pixels may be empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    GroundTruth,
    Prediction,
}

/// Row-major grid of label sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    width: u32,
    height: u32,
    pixels: Vec<LabelSet>,
}

impl LabelImage {
    pub fn new(width: u32, height: u32, pixels: Vec<LabelSet>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("{width}x{height} image has no pixels")));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidImage(format!(
                "{} pixels given for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: LabelSet) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> Dimensions {
        Dimensions {
            width: self.width,
            height: self.height,
        }
    }

    /// Pixel count `n`.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[LabelSet] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [LabelSet] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> LabelSet {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: LabelSet) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    pub(crate) fn coords(&self, index: usize) -> (u32, u32) {
        let w = self.width as usize;
        ((index % w) as u32, (index / w) as u32)
    }

    /// First pixel with an empty label set, as `(x, y)`.
    pub fn first_empty(&self) -> Option<(u32, u32)> {
        self.pixels
            .iter()
            .position(|s| s.is_empty())
            .map(|i| self.coords(i))
    }
}

/// Fails unless every label in `image` is a class of `registry`.
pub fn check_labels(image: &LabelImage, registry: &ClassRegistry) -> Result<()> {
    let used = image.pixels().iter().fold(0u32, |acc, s| acc | s.bits());
    check_label_bits(used, registry.len())
}

pub(crate) fn check_label_bits(used: u32, classes: usize) -> Result<()> {
    let valid = if classes >= 32 { u32::MAX } else { (1u32 << classes) - 1 };
    if used & !valid == 0 {
        Ok(())
    } else {
        Err(Error::InvalidImage(format!(
            "label set {:?} names classes outside a registry of {classes}",
            LabelSet(used & !valid)
        )))
    }
}

/// Fails with [`Error::DimensionMismatch`] unless both images have the same
/// width and height.
pub fn validate_pair(gt: &LabelImage, pred: &LabelImage) -> Result<()> {
    check_dimensions(gt.dimensions(), pred.dimensions())
}

pub(crate) fn check_dimensions(ground_truth: Dimensions, prediction: Dimensions) -> Result<()> {
    if ground_truth == prediction {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            ground_truth,
            prediction,
        })
    }
}

/// Decodes a lossless raster (PNG, BMP, TIFF) into 8-bit RGB.
pub fn decode_rgb(bytes: &[u8]) -> Result<RgbImage> {
    let format = image::guess_format(bytes)
        .map_err(|_| Error::UndecodableImage("unrecognized image format".into()))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Bmp | ImageFormat::Tiff) {
        return Err(Error::UndecodableImage(format!(
            "{format:?} is not a supported lossless format"
        )));
    }
    let img = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::UndecodableImage(e.to_string()))?;
    match img {
        DynamicImage::ImageRgb8(rgb) => Ok(rgb),
        DynamicImage::ImageRgba8(_) | DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => {
            Ok(img.into_rgb8())
        }
        other => Err(Error::UndecodableImage(format!(
            "{:?} samples are not 8-bit RGB",
            other.color()
        ))),
    }
}

/// Encodes an RGB raster as PNG. Uses fast compression; output is still
/// lossless and deterministic.
pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let encoder = PngEncoder::new_with_quality(
        Cursor::new(&mut out),
        CompressionType::Fast,
        FilterType::Adaptive,
    );
    image
        .write_with_encoder(encoder)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(out)
}

/// Per-byte lookup from pixel channel values to class-index masks. Ignored
/// bits map to no class, so masking falls out of the lookup.
struct BitDecoder {
    channels: [[u32; 256]; 3],
    allowed: u32,
}

impl BitDecoder {
    fn new(registry: &ClassRegistry) -> Self {
        let mut channels = [[0u32; 256]; 3];
        for class in registry.classes() {
            let bit = class.encoding_bit();
            // channel 0 is red, the high byte of 0xRRGGBB
            let channel = 2 - (bit.trailing_zeros() / 8) as usize;
            let shift = 16 - 8 * channel as u32;
            let byte_bit = (bit >> shift) as usize;
            for (value, mask) in channels[channel].iter_mut().enumerate() {
                if value & byte_bit != 0 {
                    *mask |= 1 << class.index();
                }
            }
        }
        Self {
            channels,
            allowed: registry.encoding_mask() | registry.ignore_mask(),
        }
    }

    #[inline]
    fn decode(&self, rgb: [u8; 3]) -> std::result::Result<LabelSet, u32> {
        let value = u32::from(rgb[0]) << 16 | u32::from(rgb[1]) << 8 | u32::from(rgb[2]);
        if value & !self.allowed != 0 {
            return Err(value);
        }
        Ok(LabelSet(
            self.channels[0][rgb[0] as usize]
                | self.channels[1][rgb[1] as usize]
                | self.channels[2][rgb[2] as usize],
        ))
    }
}

/// Decodes an RGB raster already in memory.
pub fn decode_rgb_labels(image: &RgbImage, registry: &ClassRegistry, role: Role) -> Result<LabelImage> {
    let (width, height) = image.dimensions();
    if width == 0 || height == 0 {
        return Err(Error::UndecodableImage("image has no pixels".into()));
    }
    let decoder = BitDecoder::new(registry);
    let mut pixels = Vec::with_capacity(width as usize * height as usize);
    for (i, px) in image.as_raw().chunks_exact(3).enumerate() {
        let set = decoder
            .decode([px[0], px[1], px[2]])
            .map_err(|value| Error::UnknownBits {
                x: (i % width as usize) as u32,
                y: (i / width as usize) as u32,
                value,
                unknown: value & !decoder.allowed,
            })?;
        if role == Role::GroundTruth && set.is_empty() {
            return Err(Error::EmptyGroundTruthPixel {
                x: (i % width as usize) as u32,
                y: (i / width as usize) as u32,
            });
        }
        pixels.push(set);
    }
    LabelImage::new(width, height, pixels)
}

/// Decodes encoded image bytes into a [`LabelImage`].
///
/// Each pixel's `0xRRGGBB` value, with ignore-mask bits cleared, is split into
/// the classes whose encoding bit it contains. Bits outside the registry are
/// an error rather than being read as background.
pub fn decode_label_image(bytes: &[u8], registry: &ClassRegistry, role: Role) -> Result<LabelImage> {
    decode_rgb_labels(&decode_rgb(bytes)?, registry, role)
}

/// Inverse of [`decode_label_image`], up to ignore-mask bits.
pub fn encode_label_image(labels: &LabelImage, registry: &ClassRegistry) -> RgbImage {
    let bits: Vec<u32> = registry.classes().iter().map(|c| c.encoding_bit()).collect();
    let mut raw = Vec::with_capacity(labels.len() * 3);
    for set in labels.pixels() {
        let value = set.iter().fold(0u32, |acc, class| acc | bits[class]);
        raw.extend_from_slice(&[(value >> 16) as u8, (value >> 8) as u8, value as u8]);
    }
    RgbImage::from_raw(labels.width(), labels.height(), raw).expect("buffer sized from image")
}
