//! Sensor-noise pixel correction and intensity-extreme masking.
//!
//! Both passes run before any gradient work: isolated pixels that deviate
//! strongly from their eight neighbors are replaced by the neighbor mean, and
//! pixels at the intensity extremes (saturated or black) are masked out so
//! they cannot contribute false edges downstream.

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage};

/// Parameters of the anomalous-pixel filter. The neighborhood is the fixed
/// 8-connected ring around each pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyFilterParams {
    /// Relative-difference threshold; a pixel is replaced when
    /// `|(p - mean) / mean|` exceeds it.
    pub theta: f64,
}

impl Default for AnomalyFilterParams {
    fn default() -> Self {
        Self { theta: 0.5 }
    }
}

const RING: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Replace pixels that differ from their 8-neighbor mean by more than
/// `theta` (relative) with that mean.
///
/// Every decision is made against the original image, so the result does not
/// depend on scan order and the pass never cascades. Border pixels, which
/// lack a full 8-neighborhood, pass through unchanged. When the neighbor
/// mean is exactly zero the relative test is undefined: a zero pixel is kept
/// and a positive pixel is pulled down to zero.
pub fn filter_anomalous_pixels(
    img: &GrayImage,
    params: &AnomalyFilterParams,
) -> Result<GrayImage> {
    if !(params.theta > 0.0) {
        return Err(Error::InvalidConfig {
            field: "pixel_dif_threshold",
            reason: "must be positive".into(),
        });
    }
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: 3,
        });
    }

    let src = img.samples();
    let mut out = src.to_vec();
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let mut sum = 0.0;
            for (dr, dc) in RING {
                let rr = (r as isize + dr) as usize;
                let cc = (c as isize + dc) as usize;
                sum += src[rr * w + cc];
            }
            let mean = sum / 8.0;
            let p = src[r * w + c];
            let replace = if mean == 0.0 {
                p > 0.0
            } else {
                ((p - mean) / mean).abs() > params.theta
            };
            if replace {
                out[r * w + c] = mean;
            }
        }
    }
    Ok(GrayImage::from_samples_unchecked(
        w,
        h,
        out,
        img.source_depth(),
    ))
}

/// Mask of pixels strictly inside the `(low, high)` intensity band.
pub fn low_high_mask(img: &GrayImage, low: f64, high: f64) -> Result<BinaryMask> {
    if !(low < high) {
        return Err(Error::InvalidConfig {
            field: "low_threshold",
            reason: format!("must satisfy low_threshold < high_threshold, got {low} >= {high}"),
        });
    }
    let bits = img.samples().iter().map(|&s| low < s && s < high).collect();
    BinaryMask::from_bits(img.width(), img.height(), bits)
}
