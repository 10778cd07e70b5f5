//! Decay-rate computation, score aggregation, the representativeness
//! indicator, and the full per-image analysis.
//!
//! The analysis measures how fast the strongest directional gradients decay
//! under a small Gaussian probe blur: crisp edges lose a large share of their
//! gradient, already-diffuse edges lose little. Selection masks are computed
//! once on the original image and reused for the blurred pass, so both passes
//! score exactly the same pixels.

use crate::config::{validate_config, MetricConfig, SharpnessReport};
use crate::error::{Error, Result};
use crate::gradient::{
    check_sobel_inputs, gaussian_blur_1d, percentile_mask, sobel_axis, sobel_gradients,
    support_mask, zeroed_samples, Axis, GradientField, SelectedGradients,
};
use crate::preprocess::{filter_anomalous_pixels, low_high_mask, AnomalyFilterParams};
use crate::raster::{BinaryMask, GrayImage};

/// Smallest image `analyze` accepts; keeps the percentile stage satisfiable.
pub const MIN_ANALYZE_DIM: usize = 64;

/// Per-pixel decay ratios for one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySet {
    pub axis: Axis,
    pub decays: Vec<f64>,
}

/// Relative gradient loss `(|g| - |g_blurred|) / |g|` at every selected pixel.
///
/// A decay never exceeds 1; it can go negative where blurring locally raised
/// the magnitude, and such values are kept rather than clamped so the mean
/// stays unbiased.
pub fn decay_rates(selected: &SelectedGradients, blurred: &GradientField) -> Result<DecaySet> {
    if selected.axis() != blurred.axis() {
        return Err(Error::AxisMismatch {
            selection: selected.axis(),
            field: blurred.axis(),
        });
    }
    if selected.mask().width() != blurred.width() || selected.mask().height() != blurred.height()
    {
        return Err(Error::ShapeMismatch {
            left: format!("{}x{}", selected.mask().width(), selected.mask().height()),
            right: format!("{}x{}", blurred.width(), blurred.height()),
        });
    }
    if selected.is_empty() {
        return Err(Error::EmptySelection("no selected gradients".into()));
    }
    let decays = selected
        .entries()
        .iter()
        .map(|&(idx, magnitude)| {
            if magnitude == 0.0 {
                0.0
            } else {
                (magnitude - blurred.values()[idx].abs()) / magnitude
            }
        })
        .collect();
    Ok(DecaySet {
        axis: selected.axis(),
        decays,
    })
}

/// Mean decay expressed as a percentage.
pub fn sharpness_score(decays: &DecaySet) -> Result<f64> {
    if decays.decays.is_empty() {
        return Err(Error::EmptySelection("no decay values".into()));
    }
    Ok(100.0 * decays.decays.iter().sum::<f64>() / decays.decays.len() as f64)
}

/// Mean selected gradient magnitude after a much heavier blur
/// (`rep_scale * gauss_size` taps, `rep_sigma`), per axis.
///
/// Sensor noise and near-Nyquist texture do not survive the heavy blur, so
/// images whose strongest gradients are only noise score near zero and can be
/// gated out; genuine large-scale edges keep a sizable mean gradient.
pub fn representativeness(
    img: &GrayImage,
    mask_lh: &BinaryMask,
    sel_x: &SelectedGradients,
    sel_y: &SelectedGradients,
    cfg: &MetricConfig,
) -> Result<(f64, f64)> {
    check_sobel_inputs(img, mask_lh, cfg.sobel_size)?;
    let support = support_mask(mask_lh, cfg.sobel_size);
    let rep_size = cfg.rep_scale as usize * cfg.gauss_size;
    let (w, h) = (img.width(), img.height());

    let blurred_x = gaussian_blur_1d(img, rep_size, cfg.rep_sigma, Axis::X)?;
    let grad_x = sobel_axis(
        &zeroed_samples(&blurred_x, mask_lh),
        w,
        h,
        cfg.sobel_size,
        Axis::X,
        &support,
    );
    let blurred_y = gaussian_blur_1d(img, rep_size, cfg.rep_sigma, Axis::Y)?;
    let grad_y = sobel_axis(
        &zeroed_samples(&blurred_y, mask_lh),
        w,
        h,
        cfg.sobel_size,
        Axis::Y,
        &support,
    );
    Ok((
        mean_magnitude_at(&grad_x, sel_x)?,
        mean_magnitude_at(&grad_y, sel_y)?,
    ))
}

fn mean_magnitude_at(field: &GradientField, sel: &SelectedGradients) -> Result<f64> {
    if sel.axis() != field.axis() {
        return Err(Error::AxisMismatch {
            selection: sel.axis(),
            field: field.axis(),
        });
    }
    if sel.is_empty() {
        return Err(Error::EmptySelection("no selected gradients".into()));
    }
    let sum: f64 = sel
        .entries()
        .iter()
        .map(|&(idx, _)| field.values()[idx].abs())
        .sum();
    Ok(sum / sel.len() as f64)
}

/// Every intermediate product of one analysis run, for diagnostics and for
/// checking the pipeline stage by stage.
#[derive(Debug, Clone)]
pub struct AnalysisTrace {
    pub filtered: GrayImage,
    pub mask_lh: BinaryMask,
    pub grad_x: GradientField,
    pub grad_y: GradientField,
    pub sel_x: SelectedGradients,
    pub sel_y: SelectedGradients,
    pub blurred_x: GrayImage,
    pub blurred_y: GrayImage,
    pub blurred_grad_x: GradientField,
    pub blurred_grad_y: GradientField,
    pub decays_x: DecaySet,
    pub decays_y: DecaySet,
    pub report: SharpnessReport,
}

/// Run the full analysis and keep all intermediates.
///
/// Stage order: anomalous-pixel filter, intensity mask, Sobel gradients,
/// percentile selection per axis, directional probe blur per axis, blurred
/// gradients under the original masks, decay rates, scores, and the
/// representativeness indicator.
pub fn analyze_trace(img: &GrayImage, cfg: &MetricConfig) -> Result<AnalysisTrace> {
    let cfg = validate_config(cfg.clone())?;
    if img.width() < MIN_ANALYZE_DIM || img.height() < MIN_ANALYZE_DIM {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: MIN_ANALYZE_DIM,
        });
    }

    let filtered = filter_anomalous_pixels(
        img,
        &AnomalyFilterParams {
            theta: cfg.pixel_dif_threshold,
        },
    )?;
    let mask_lh = low_high_mask(&filtered, cfg.low_threshold, cfg.high_threshold)?;

    let (grad_x, grad_y) = sobel_gradients(&filtered, &mask_lh, cfg.sobel_size)?;
    let sel_x = percentile_mask(&grad_x, cfg.percentile_low, cfg.percentile_high)?;
    let sel_y = percentile_mask(&grad_y, cfg.percentile_low, cfg.percentile_high)?;

    let (w, h) = (filtered.width(), filtered.height());
    let support = grad_x.support();
    let blurred_x = gaussian_blur_1d(&filtered, cfg.gauss_size, cfg.gauss_sigma, Axis::X)?;
    let blurred_y = gaussian_blur_1d(&filtered, cfg.gauss_size, cfg.gauss_sigma, Axis::Y)?;
    let blurred_grad_x = sobel_axis(
        &zeroed_samples(&blurred_x, &mask_lh),
        w,
        h,
        cfg.sobel_size,
        Axis::X,
        support,
    );
    let blurred_grad_y = sobel_axis(
        &zeroed_samples(&blurred_y, &mask_lh),
        w,
        h,
        cfg.sobel_size,
        Axis::Y,
        support,
    );

    let decays_x = decay_rates(&sel_x, &blurred_grad_x)?;
    let decays_y = decay_rates(&sel_y, &blurred_grad_y)?;
    let s_x = sharpness_score(&decays_x)?;
    let s_y = sharpness_score(&decays_y)?;

    let (r_x, r_y) = representativeness(&filtered, &mask_lh, &sel_x, &sel_y, &cfg)?;

    let report = SharpnessReport {
        s_x,
        s_y,
        r_x,
        r_y,
        selected_count_x: sel_x.len(),
        selected_count_y: sel_y.len(),
        representative_x: r_x >= cfg.rep_threshold,
        representative_y: r_y >= cfg.rep_threshold,
    };

    Ok(AnalysisTrace {
        filtered,
        mask_lh,
        grad_x,
        grad_y,
        sel_x,
        sel_y,
        blurred_x,
        blurred_y,
        blurred_grad_x,
        blurred_grad_y,
        decays_x,
        decays_y,
        report,
    })
}

/// Run the full analysis and return just the report.
pub fn analyze(img: &GrayImage, cfg: &MetricConfig) -> Result<SharpnessReport> {
    analyze_trace(img, cfg).map(|t| t.report)
}
