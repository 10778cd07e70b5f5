//! Directional derivatives, percentile-based edge isolation, and separable
//! Gaussian blurring.
//!
//! All convolutions use reflect padding (edge sample repeated, `cba|abc`),
//! which keeps normalized symmetric kernels exactly mean-preserving. Sobel
//! kernels are the outer product of a binomial smoothing vector and a
//! derivative vector, scaled so that a unit-slope ramp yields gradient 1.0;
//! scores stay comparable across kernel sizes.

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage};

/// Image axis along which a derivative or blur acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Minimum number of valid gradient pixels required for percentile selection.
pub const MIN_VALID_PIXELS: usize = 100;

/// Signed per-pixel directional derivative raster.
///
/// `support` marks pixels whose whole kernel window lay inside the image and
/// touched no invalid input pixel; only those participate in percentile
/// selection.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    values: Vec<f64>,
    axis: Axis,
    support: BinaryMask,
}

impl GradientField {
    pub fn from_parts(
        width: usize,
        height: usize,
        values: Vec<f64>,
        axis: Axis,
        support: BinaryMask,
    ) -> Result<Self> {
        if values.len() != width * height
            || support.width() != width
            || support.height() != height
        {
            return Err(Error::ShapeMismatch {
                left: format!("{} values, {}x{} support", values.len(), support.width(), support.height()),
                right: format!("{width}x{height}"),
            });
        }
        Ok(Self {
            width,
            height,
            values,
            axis,
            support,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn support(&self) -> &BinaryMask {
        &self.support
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Gradients retained by a percentile window, with the mask that selected them.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedGradients {
    axis: Axis,
    entries: Vec<(usize, f64)>,
    mask: BinaryMask,
}

impl SelectedGradients {
    /// Assemble a selection; `entries` are `(pixel index, magnitude)` pairs
    /// sorted by pixel index, and every entry must be flagged in `mask`.
    pub fn from_parts(
        axis: Axis,
        entries: Vec<(usize, f64)>,
        mask: BinaryMask,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySelection("no selected gradients".into()));
        }
        let len = mask.bits().len();
        let mut prev = None;
        for &(idx, _) in &entries {
            if idx >= len || !mask.bits()[idx] {
                return Err(Error::ShapeMismatch {
                    left: format!("entry index {idx}"),
                    right: format!("{}x{} mask", mask.width(), mask.height()),
                });
            }
            if prev.is_some_and(|p| p >= idx) {
                return Err(Error::InvalidConfig {
                    field: "entries",
                    reason: "must be sorted by pixel index".into(),
                });
            }
            prev = Some(idx);
        }
        Ok(Self {
            axis,
            entries,
            mask,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Reflect an index into `[0, n)` by mirroring at the borders with the edge
/// sample repeated: `-1 -> 0`, `-2 -> 1`, `n -> n-1`, `n+1 -> n-2`.
fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// 1-D correlation along rows (the X direction) with reflect padding.
fn pass_rows(src: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let half = taps.len() / 2;
    let mut out = vec![0.0; src.len()];
    for r in 0..h {
        let row = &src[r * w..(r + 1) * w];
        let dst = &mut out[r * w..(r + 1) * w];
        if w > 2 * half {
            for (c, d) in dst.iter_mut().enumerate().take(half) {
                *d = border_tap(row, w, c, taps, half);
            }
            for (d, window) in dst[half..w - half].iter_mut().zip(row.windows(taps.len())) {
                *d = taps.iter().zip(window).map(|(t, s)| t * s).sum();
            }
            for (c, d) in dst.iter_mut().enumerate().skip(w - half) {
                *d = border_tap(row, w, c, taps, half);
            }
        } else {
            for (c, d) in dst.iter_mut().enumerate() {
                *d = border_tap(row, w, c, taps, half);
            }
        }
    }
    out
}

fn border_tap(row: &[f64], w: usize, c: usize, taps: &[f64], half: usize) -> f64 {
    let mut acc = 0.0;
    for (k, t) in taps.iter().enumerate() {
        acc += t * row[reflect(c as isize + k as isize - half as isize, w)];
    }
    acc
}

/// 1-D correlation along columns (the Y direction) with reflect padding.
fn pass_cols(src: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let half = taps.len() / 2;
    let mut out = vec![0.0; src.len()];
    for r in 0..h {
        let dst = &mut out[r * w..(r + 1) * w];
        for (k, t) in taps.iter().enumerate() {
            let sr = reflect(r as isize + k as isize - half as isize, h);
            let srow = &src[sr * w..(sr + 1) * w];
            for (d, s) in dst.iter_mut().zip(srow) {
                *d += t * s;
            }
        }
    }
    out
}

/// Row `size` of Pascal's triangle (binomial smoothing vector).
fn binomial_row(size: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 1..size {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(1.0);
        for i in 1..row.len() {
            next.push(row[i - 1] + row[i]);
        }
        next.push(1.0);
        row = next;
    }
    row
}

fn convolve_full(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Smoothing and derivative vectors for a `size`x`size` Sobel kernel, with
/// the derivative pre-scaled so the full kernel responds 1.0 to a unit ramp.
/// `size` 5 gives smoothing `[1,4,6,4,1]` and derivative `[-1,-2,0,2,1]`.
fn sobel_taps(size: usize) -> (Vec<f64>, Vec<f64>) {
    let smooth = binomial_row(size);
    let deriv = convolve_full(&[-1.0, 0.0, 1.0], &binomial_row(size - 2));
    let half = (size / 2) as f64;
    let moment: f64 = deriv
        .iter()
        .enumerate()
        .map(|(k, d)| d * (k as f64 - half))
        .sum();
    let norm = smooth.iter().sum::<f64>() * moment;
    let deriv = deriv.iter().map(|d| d / norm).collect();
    (smooth, deriv)
}

/// Pixels whose `size`x`size` window lies fully inside the image and contains
/// only valid pixels.
pub(crate) fn support_mask(valid: &BinaryMask, size: usize) -> BinaryMask {
    let (w, h) = (valid.width(), valid.height());
    let half = size / 2;
    // integral image of invalid counts
    let stride = w + 1;
    let mut integral = vec![0u32; stride * (h + 1)];
    for r in 0..h {
        for c in 0..w {
            let inv = u32::from(!valid.get(r, c));
            integral[(r + 1) * stride + (c + 1)] =
                inv + integral[r * stride + (c + 1)] + integral[(r + 1) * stride + c]
                    - integral[r * stride + c];
        }
    }
    let rect = |r0: usize, c0: usize, r1: usize, c1: usize| {
        integral[(r1 + 1) * stride + (c1 + 1)] + integral[r0 * stride + c0]
            - integral[r0 * stride + (c1 + 1)]
            - integral[(r1 + 1) * stride + c0]
    };
    let mut bits = vec![false; w * h];
    if w > 2 * half && h > 2 * half {
        for r in half..h - half {
            for c in half..w - half {
                bits[r * w + c] = rect(r - half, c - half, r + half, c + half) == 0;
            }
        }
    }
    BinaryMask::from_bits(w, h, bits).expect("support mask shape")
}

pub(crate) fn zeroed_samples(img: &GrayImage, valid: &BinaryMask) -> Vec<f64> {
    img.samples()
        .iter()
        .zip(valid.bits())
        .map(|(&s, &v)| if v { s } else { 0.0 })
        .collect()
}

/// One-axis Sobel of already-zeroed samples with a precomputed support mask.
pub(crate) fn sobel_axis(
    zeroed: &[f64],
    w: usize,
    h: usize,
    size: usize,
    axis: Axis,
    support: &BinaryMask,
) -> GradientField {
    let (smooth, deriv) = sobel_taps(size);
    let values = match axis {
        Axis::X => pass_cols(&pass_rows(zeroed, w, h, &deriv), w, h, &smooth),
        Axis::Y => pass_cols(&pass_rows(zeroed, w, h, &smooth), w, h, &deriv),
    };
    GradientField {
        width: w,
        height: h,
        values,
        axis,
        support: support.clone(),
    }
}

pub(crate) fn check_sobel_inputs(img: &GrayImage, valid: &BinaryMask, size: usize) -> Result<()> {
    if size % 2 == 0 || size < 3 {
        return Err(Error::BadKernelSize { size, min: 3 });
    }
    if img.width() != valid.width() || img.height() != valid.height() {
        return Err(Error::ShapeMismatch {
            left: format!("{}x{} image", img.width(), img.height()),
            right: format!("{}x{} mask", valid.width(), valid.height()),
        });
    }
    Ok(())
}

/// Directional Sobel derivatives of the masked image.
///
/// Invalid pixels are zeroed before convolution and every output pixel whose
/// kernel window overlaps an invalid or out-of-image pixel is dropped from
/// the support mask, so saturation boundaries cannot inject false edges into
/// the percentile selection.
pub fn sobel_gradients(
    img: &GrayImage,
    valid: &BinaryMask,
    size: usize,
) -> Result<(GradientField, GradientField)> {
    check_sobel_inputs(img, valid, size)?;
    let (w, h) = (img.width(), img.height());
    let zeroed = zeroed_samples(img, valid);
    let support = support_mask(valid, size);
    let gx = sobel_axis(&zeroed, w, h, size, Axis::X, &support);
    let gy = sobel_axis(&zeroed, w, h, size, Axis::Y, &support);
    Ok((gx, gy))
}

/// The order statistics at `ranks` (strictly increasing, 0-based), found by
/// successive partitioning instead of a full sort.
fn order_statistics(values: &mut [f64], ranks: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ranks.len());
    let mut offset = 0usize;
    let mut slice: &mut [f64] = values;
    for &rank in ranks {
        let idx = rank - offset;
        let (_, v, rest) =
            slice.select_nth_unstable_by(idx, |a, b| a.partial_cmp(b).expect("finite magnitudes"));
        out.push(*v);
        offset = rank + 1;
        slice = rest;
    }
    out
}

/// Linear-interpolation percentiles at `p_low` and `p_high`; equivalent to
/// interpolating between closest ranks of the fully sorted data.
fn percentile_pair(values: &mut [f64], p_low: f64, p_high: f64) -> (f64, f64) {
    let n = values.len();
    let position = |p: f64| p / 100.0 * ((n - 1) as f64);
    let (pos_low, pos_high) = (position(p_low), position(p_high));

    let mut ranks = Vec::with_capacity(4);
    for pos in [pos_low, pos_high] {
        let lo = pos.floor() as usize;
        ranks.push(lo);
        if lo + 1 < n {
            ranks.push(lo + 1);
        }
    }
    ranks.sort_unstable();
    ranks.dedup();
    let stats = order_statistics(values, &ranks);
    let value_at = |rank: usize| stats[ranks.binary_search(&rank).expect("rank fetched")];

    let interp = |pos: f64| {
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        if lo + 1 >= n {
            value_at(n - 1)
        } else {
            value_at(lo) + frac * (value_at(lo + 1) - value_at(lo))
        }
    };
    (interp(pos_low), interp(pos_high))
}

/// Keep the gradients whose magnitude falls inside the
/// `[p_low, p_high]` percentile window of the valid-pixel magnitude
/// distribution.
///
/// Percentiles interpolate linearly between closest ranks and are computed
/// over `|value|`, so both edge polarities are retained.
pub fn percentile_mask(
    field: &GradientField,
    p_low: f64,
    p_high: f64,
) -> Result<SelectedGradients> {
    if !(p_low >= 0.0 && p_high <= 100.0 && p_low < p_high) {
        return Err(Error::InvalidConfig {
            field: "percentile_low",
            reason: format!("percentile window [{p_low}, {p_high}] invalid"),
        });
    }

    let mut scratch: Vec<f64> = field
        .values
        .iter()
        .zip(field.support.bits())
        .filter_map(|(&v, &ok)| ok.then_some(v.abs()))
        .collect();

    if scratch.len() < MIN_VALID_PIXELS {
        return Err(Error::InsufficientGradientSupport {
            valid: scratch.len(),
            min: MIN_VALID_PIXELS,
        });
    }

    let (min, max) = scratch
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| {
            (lo.min(m), hi.max(m))
        });
    if min == max {
        return Err(Error::DegenerateDistribution);
    }

    let (lo, hi) = percentile_pair(&mut scratch, p_low, p_high);
    drop(scratch);

    let entries: Vec<(usize, f64)> = field
        .values
        .iter()
        .zip(field.support.bits())
        .enumerate()
        .filter_map(|(i, (&v, &ok))| {
            let m = v.abs();
            (ok && m >= lo && m <= hi).then_some((i, m))
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptySelection(format!(
            "percentile window [{lo}, {hi}] contains no pixels"
        )));
    }

    let mut bits = vec![false; field.values.len()];
    for &(i, _) in &entries {
        bits[i] = true;
    }
    let mask = BinaryMask::from_bits(field.width, field.height, bits)?;
    SelectedGradients::from_parts(field.axis, entries, mask)
}

/// Normalized Gaussian taps `w_k ∝ exp(-k^2 / (2 sigma^2))`.
fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size / 2) as isize;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|k| {
            let kk = (k * k) as f64;
            (-kk / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Blur with a normalized `size`-tap 1-D Gaussian along one axis only.
pub fn gaussian_blur_1d(
    img: &GrayImage,
    size: usize,
    sigma: f64,
    axis: Axis,
) -> Result<GrayImage> {
    if size % 2 == 0 {
        return Err(Error::BadKernelSize { size, min: 1 });
    }
    if !(sigma > 0.0) {
        return Err(Error::BadSigma(sigma));
    }
    let taps = gaussian_taps(size, sigma);
    let (w, h) = (img.width(), img.height());
    let blurred = match axis {
        Axis::X => pass_rows(img.samples(), w, h, &taps),
        Axis::Y => pass_cols(img.samples(), w, h, &taps),
    };
    Ok(GrayImage::from_samples_unchecked(
        w,
        h,
        blurred,
        img.source_depth(),
    ))
}
