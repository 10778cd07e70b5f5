//! Direction-aware no-reference sharpness analysis for grayscale rasters.
//!
//! The core idea: take the strongest directional gradients of an image, blur
//! the image with a small Gaussian probe, and measure how much of each
//! gradient survives. Crisp edges decay fast under the probe, diffuse edges
//! barely change, so the mean normalized decay is a content-independent
//! per-axis sharpness score (`s_x`, `s_y`). A second, much heavier blur
//! yields a representativeness indicator (`r_x`, `r_y`) that gates out images
//! whose strongest gradients are only noise or near-Nyquist texture and
//! therefore cannot support a trustworthy reading.
//!
//! Scoring an image:
//!
//! ```no_run
//! use edgedecay::{analyze, load_image, MetricConfig};
//!
//! let img = load_image(std::path::Path::new("frame.png"))?;
//! let report = analyze(&img, &MetricConfig::default())?;
//! println!("S_x = {:.1}, S_y = {:.1}", report.s_x, report.s_y);
//! # Ok::<(), edgedecay::Error>(())
//! ```
//!
//! The [`bench`] module generates synthetic block scenes, degrades them with
//! a PSF, directional blur, and noise, and correlates the scores against the
//! applied blur for validation sweeps.

pub mod bench;
mod config;
mod error;
mod gradient;
mod metric;
mod preprocess;
mod raster;

pub use config::{validate_config, MetricConfig, SharpnessReport};
pub use error::{Error, Result};
pub use gradient::{
    gaussian_blur_1d, percentile_mask, sobel_gradients, Axis, GradientField, SelectedGradients,
    MIN_VALID_PIXELS,
};
pub use metric::{
    analyze, analyze_trace, decay_rates, representativeness, sharpness_score, AnalysisTrace,
    DecaySet, MIN_ANALYZE_DIM,
};
pub use preprocess::{filter_anomalous_pixels, low_high_mask, AnomalyFilterParams};
pub use raster::{load_image, BinaryMask, GrayImage};
