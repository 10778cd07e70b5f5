//! Grayscale raster and binary mask primitives shared by the whole pipeline.
//!
//! Images are stored as row-major `f64` samples normalized to `[0, 1]`
//! regardless of the bit depth of the decoded file, so every intensity
//! threshold carries the same meaning for 8- and 16-bit inputs. Multi-channel
//! inputs are reduced to one channel by an unweighted channel mean.

use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};

/// Single-channel raster with samples normalized to `[0, 1]`.
///
/// `source_depth` records the bits per sample of the file the image was
/// decoded from (8 or 16); normalization is `raw / (2^source_depth - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<f64>,
    source_depth: u8,
}

impl GrayImage {
    /// Build an image from row-major samples, checking all invariants.
    pub fn from_samples(
        width: usize,
        height: usize,
        samples: Vec<f64>,
        source_depth: u8,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if samples.len() != width * height {
            return Err(Error::ShapeMismatch {
                left: format!("{} samples", samples.len()),
                right: format!("{width}x{height}"),
            });
        }
        if source_depth != 8 && source_depth != 16 {
            return Err(Error::InvalidConfig {
                field: "source_depth",
                reason: format!("must be 8 or 16, got {source_depth}"),
            });
        }
        if let Some(bad) = samples.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidConfig {
                field: "samples",
                reason: format!("sample {bad} outside [0, 1]"),
            });
        }
        Ok(Self::from_samples_unchecked(
            width,
            height,
            samples,
            source_depth,
        ))
    }

    /// Internal constructor for values already known to satisfy the invariants.
    pub(crate) fn from_samples_unchecked(
        width: usize,
        height: usize,
        samples: Vec<f64>,
        source_depth: u8,
    ) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        Self {
            width,
            height,
            samples,
            source_depth,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn source_depth(&self) -> u8 {
        self.source_depth
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Map samples back to integer levels at the source depth.
    /// Decoding and renormalizing is idempotent, so this round-trips exactly.
    pub fn requantize(&self) -> Vec<u16> {
        let max = ((1u32 << self.source_depth) - 1) as f64;
        self.samples
            .iter()
            .map(|s| (s * max).round() as u16)
            .collect()
    }
}

/// Per-pixel validity map; `true` means the pixel participates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::ShapeMismatch {
                left: format!("{} bits", bits.len()),
                right: format!("{width}x{height}"),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Pixel-wise AND. Composition is commutative, associative and idempotent.
    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::ShapeMismatch {
                left: format!("{}x{}", self.width, self.height),
                right: format!("{}x{}", other.width, other.height),
            });
        }
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| *a && *b)
            .collect();
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits,
        })
    }
}

/// Decode an 8- or 16-bit PNG or TIFF into a normalized grayscale raster.
///
/// Multi-channel images are averaged over their color channels (alpha is
/// dropped). Anything that is not 8- or 16-bit integer data is rejected.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let decoded = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        source => Error::Decode {
            path: path.to_path_buf(),
            source,
        },
    })?;

    let width = decoded.width() as usize;
    let height = decoded.height() as usize;
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }

    const MAX8: f64 = 255.0;
    const MAX16: f64 = 65535.0;
    let (samples, depth): (Vec<f64>, u8) = match decoded {
        DynamicImage::ImageLuma8(buf) => {
            (buf.into_raw().iter().map(|&v| v as f64 / MAX8).collect(), 8)
        }
        DynamicImage::ImageLumaA8(buf) => (
            buf.into_raw().chunks_exact(2).map(|px| px[0] as f64 / MAX8).collect(),
            8,
        ),
        DynamicImage::ImageRgb8(buf) => (
            buf.into_raw()
                .chunks_exact(3)
                .map(|px| (px[0] as f64 + px[1] as f64 + px[2] as f64) / 3.0 / MAX8)
                .collect(),
            8,
        ),
        DynamicImage::ImageRgba8(buf) => (
            buf.into_raw()
                .chunks_exact(4)
                .map(|px| (px[0] as f64 + px[1] as f64 + px[2] as f64) / 3.0 / MAX8)
                .collect(),
            8,
        ),
        DynamicImage::ImageLuma16(buf) => (
            buf.into_raw().iter().map(|&v| v as f64 / MAX16).collect(),
            16,
        ),
        DynamicImage::ImageLumaA16(buf) => (
            buf.into_raw().chunks_exact(2).map(|px| px[0] as f64 / MAX16).collect(),
            16,
        ),
        DynamicImage::ImageRgb16(buf) => (
            buf.into_raw()
                .chunks_exact(3)
                .map(|px| (px[0] as f64 + px[1] as f64 + px[2] as f64) / 3.0 / MAX16)
                .collect(),
            16,
        ),
        DynamicImage::ImageRgba16(buf) => (
            buf.into_raw()
                .chunks_exact(4)
                .map(|px| (px[0] as f64 + px[1] as f64 + px[2] as f64) / 3.0 / MAX16)
                .collect(),
            16,
        ),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                format: format!("{:?}", other.color()),
            })
        }
    };

    GrayImage::from_samples(width, height, samples, depth)
}
