//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

use crate::gradient::Axis;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("unsupported pixel format {format} in {path} (need 8- or 16-bit grayscale or RGB)")]
    UnsupportedFormat { path: PathBuf, format: String },

    #[error("image has zero width or height")]
    EmptyImage,

    #[error("invalid config: {field} {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("image is {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("kernel size must be odd and >= {min}, got {size}")]
    BadKernelSize { size: usize, min: usize },

    #[error("sigma must be positive, got {0}")]
    BadSigma(f64),

    #[error("insufficient gradient support: {valid} valid gradient pixels, need at least {min}")]
    InsufficientGradientSupport { valid: usize, min: usize },

    #[error("degenerate distribution: all valid gradient magnitudes are equal")]
    DegenerateDistribution,

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("axis mismatch: selection is {selection:?} but field is {field:?}")]
    AxisMismatch { selection: Axis, field: Axis },

    #[error("kernel must be nonnegative and sum to 1 (sum = {sum})")]
    UnnormalizedKernel { sum: f64 },

    #[error("invalid psf file {path}: {reason}")]
    PsfFile { path: PathBuf, reason: String },

    #[error("block_size {block_size} too large for {width}x{height} (need width and height >= 4x block_size)")]
    BlockTooLarge {
        block_size: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("insufficient distinct sigma levels: found {found}, need at least 3")]
    InsufficientSigmaLevels { found: usize },

    #[error("no rank variation: {0}")]
    NoRankVariation(&'static str),
}

impl Error {
    /// True for failures caused by what the image contains (flat, saturated,
    /// featureless) rather than by bad inputs or configuration. Such images
    /// cannot support a sharpness reading and are treated as non-representative
    /// by policy-aware callers.
    pub fn is_content_limited(&self) -> bool {
        matches!(
            self,
            Error::InsufficientGradientSupport { .. }
                | Error::DegenerateDistribution
                | Error::EmptySelection(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
