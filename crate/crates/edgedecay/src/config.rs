//! Analysis configuration and the per-image report.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tunable parameters of the sharpness analysis.
///
/// The config serializes as a flat JSON object with exactly these field
/// names; missing fields fall back to the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// Lower percentile of the gradient-magnitude selection window (default 98.5).
    pub percentile_low: f64,
    /// Upper percentile of the selection window (default 99.5).
    pub percentile_high: f64,
    /// Sobel kernel side length, odd and >= 3 (default 5).
    pub sobel_size: usize,
    /// Probe-blur tap count, odd and >= 3 (default 5).
    pub gauss_size: usize,
    /// Probe-blur standard deviation in pixels (default 1).
    pub gauss_sigma: f64,
    /// Kernel-size multiplier for the representativeness blur (default 3).
    pub rep_scale: u32,
    /// Representativeness-blur standard deviation in pixels (default 5).
    pub rep_sigma: f64,
    /// Relative-difference threshold of the anomalous-pixel filter
    /// (default 0.5). A very large value effectively disables the filter.
    pub pixel_dif_threshold: f64,
    /// Exclusive lower intensity bound of the validity mask (default 0.0).
    pub low_threshold: f64,
    /// Exclusive upper intensity bound of the validity mask (default 1.0).
    pub high_threshold: f64,
    /// Gate on the representativeness indicator (default 0.01).
    pub rep_threshold: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            percentile_low: 98.5,
            percentile_high: 99.5,
            sobel_size: 5,
            gauss_size: 5,
            gauss_sigma: 1.0,
            rep_scale: 3,
            rep_sigma: 5.0,
            pixel_dif_threshold: 0.5,
            low_threshold: 0.0,
            high_threshold: 1.0,
            rep_threshold: 0.01,
        }
    }
}

impl MetricConfig {
    /// Parse and validate a config from a JSON string.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: MetricConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig {
            field: "json",
            reason: e.to_string(),
        })?;
        validate_config(cfg)
    }

    /// Parse and validate a config from a JSON file.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

/// Check every config invariant, reporting the offending field by name.
pub fn validate_config(cfg: MetricConfig) -> Result<MetricConfig> {
    fn fail(field: &'static str, reason: impl Into<String>) -> Error {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }

    if !(cfg.percentile_low > 0.0 && cfg.percentile_low < 100.0) {
        return Err(fail("percentile_low", "must lie in (0, 100)"));
    }
    if !(cfg.percentile_high > 0.0 && cfg.percentile_high < 100.0) {
        return Err(fail("percentile_high", "must lie in (0, 100)"));
    }
    if !(cfg.percentile_low < cfg.percentile_high) {
        return Err(fail(
            "percentile_low",
            "must satisfy percentile_low < percentile_high",
        ));
    }
    if cfg.sobel_size % 2 == 0 {
        return Err(fail("sobel_size", "must be odd"));
    }
    if cfg.sobel_size < 3 {
        return Err(fail("sobel_size", "must be >= 3"));
    }
    if cfg.gauss_size % 2 == 0 {
        return Err(fail("gauss_size", "must be odd"));
    }
    if cfg.gauss_size < 3 {
        return Err(fail("gauss_size", "must be >= 3"));
    }
    if !(cfg.gauss_sigma > 0.0) {
        return Err(fail("gauss_sigma", "must be positive"));
    }
    if cfg.rep_scale < 1 {
        return Err(fail("rep_scale", "must be >= 1"));
    }
    if !(cfg.rep_sigma > 0.0) {
        return Err(fail("rep_sigma", "must be positive"));
    }
    if !(cfg.pixel_dif_threshold > 0.0) {
        return Err(fail("pixel_dif_threshold", "must be positive"));
    }
    if !(cfg.low_threshold >= 0.0) {
        return Err(fail("low_threshold", "must be >= 0"));
    }
    if !(cfg.high_threshold <= 1.0) {
        return Err(fail("high_threshold", "must be <= 1"));
    }
    if !(cfg.low_threshold < cfg.high_threshold) {
        return Err(fail(
            "low_threshold",
            "must satisfy low_threshold < high_threshold",
        ));
    }
    if !(cfg.rep_threshold >= 0.0 && cfg.rep_threshold.is_finite()) {
        return Err(fail("rep_threshold", "must be finite and >= 0"));
    }
    Ok(cfg)
}

/// Outcome of one analysis run.
///
/// Serializes as a flat JSON object with exactly these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    /// Percent decay of the selected horizontal gradients under the probe blur.
    pub s_x: f64,
    /// Percent decay of the selected vertical gradients under the probe blur.
    pub s_y: f64,
    /// Mean selected gradient magnitude surviving the heavy representativeness blur, X axis.
    pub r_x: f64,
    /// Same for the Y axis.
    pub r_y: f64,
    pub selected_count_x: usize,
    pub selected_count_y: usize,
    /// `r_x >= rep_threshold`
    pub representative_x: bool,
    /// `r_y >= rep_threshold`
    pub representative_y: bool,
}
