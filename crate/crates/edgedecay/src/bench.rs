//! Synthetic degradation benchmark: block-pattern scenes, PSF / directional
//! blur / noise degradations, sweep evaluation, and correlation statistics.
//!
//! Scenes are grids of foreground squares (side `n`, pitch `2n`) whose block
//! size controls the spatial frequency content. Each scene is degraded by an
//! optional PSF, a directional Gaussian blur, and white Gaussian noise, then
//! scored; sweep records correlate the per-axis scores against the applied
//! blur sigmas.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{MetricConfig, SharpnessReport};
use crate::error::{Error, Result};
use crate::gradient::Axis;
use crate::metric::analyze;
use crate::raster::GrayImage;

/// Deterministic block-pattern scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    /// Square side and separation, in pixels.
    pub block_size: usize,
    /// Background level; the foreground sits at `brightness + contrast`.
    pub brightness: f64,
    pub contrast: f64,
    pub seed: u64,
}

/// Normalized nonnegative 2-D convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Kernel2D {
    /// Validate shape, nonnegativity, and unit sum (within 1e-9).
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                left: format!("{} kernel values", values.len()),
                right: format!("{rows}x{cols}"),
            });
        }
        if rows % 2 == 0 || cols % 2 == 0 {
            return Err(Error::BadKernelSize {
                size: if rows % 2 == 0 { rows } else { cols },
                min: 1,
            });
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || values.iter().any(|v| *v < 0.0) {
            return Err(Error::UnnormalizedKernel { sum });
        }
        Ok(Self { rows, cols, values })
    }

    /// Sampled 2-D Gaussian, normalized to sum 1.
    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        if size % 2 == 0 {
            return Err(Error::BadKernelSize { size, min: 1 });
        }
        if !(sigma > 0.0) {
            return Err(Error::BadSigma(sigma));
        }
        let half = (size / 2) as isize;
        let mut values = Vec::with_capacity(size * size);
        for r in -half..=half {
            for c in -half..=half {
                let d2 = (r * r + c * c) as f64;
                values.push((-d2 / (2.0 * sigma * sigma)).exp());
            }
        }
        let sum: f64 = values.iter().sum();
        for v in &mut values {
            *v /= sum;
        }
        Ok(Self {
            rows: size,
            cols: size,
            values,
        })
    }

    /// Single centered 1 — the do-nothing kernel.
    pub fn identity(size: usize) -> Result<Self> {
        if size % 2 == 0 {
            return Err(Error::BadKernelSize { size, min: 1 });
        }
        let mut values = vec![0.0; size * size];
        values[(size / 2) * size + size / 2] = 1.0;
        Ok(Self {
            rows: size,
            cols: size,
            values,
        })
    }

    /// Parse a plain-text kernel: one row per line, whitespace-separated reals.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let fail = |reason: &str| Error::PsfFile {
            path: origin.to_path_buf(),
            reason: reason.to_string(),
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            rows.push(row.map_err(|e| fail(&format!("bad number: {e}")))?);
        }
        if rows.is_empty() {
            return Err(fail("no rows"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(fail("rows have differing lengths"));
        }
        Kernel2D::from_values(rows.len(), cols, rows.concat())
    }

    /// Read and parse a kernel file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Short label for record emission.
    pub fn label(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }
}

/// One degradation recipe: optional PSF, directional blur, additive noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationSpec {
    pub psf: Option<Kernel2D>,
    /// Directional blur sigma along X; 0 skips that axis.
    pub blur_sigma_x: f64,
    pub blur_sigma_y: f64,
    /// Tap count of the directional blur (odd).
    pub blur_size: usize,
    /// Standard deviation of the white Gaussian noise, in normalized units.
    pub noise_sigma: f64,
    pub seed: u64,
}

/// One (scene, degradation) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub scene: SceneSpec,
    pub degradation: DegradationSpec,
    pub report: Option<SharpnessReport>,
    pub error: Option<String>,
}

/// Render the block grid: foreground squares of side `n` at even block
/// coordinates, so the pattern pitch is `2n` along both axes.
pub fn generate_scene(spec: &SceneSpec) -> Result<GrayImage> {
    if spec.block_size == 0 {
        return Err(Error::InvalidScene("block_size must be >= 1".into()));
    }
    if spec.width < 4 * spec.block_size || spec.height < 4 * spec.block_size {
        return Err(Error::BlockTooLarge {
            block_size: spec.block_size,
            width: spec.width,
            height: spec.height,
        });
    }
    let background = spec.brightness.clamp(0.0, 1.0);
    let foreground = (spec.brightness + spec.contrast).clamp(0.0, 1.0);
    let n = spec.block_size;
    let mut samples = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let fg = (x / n) % 2 == 0 && (y / n) % 2 == 0;
            samples.push(if fg { foreground } else { background });
        }
    }
    Ok(GrayImage::from_samples_unchecked(
        spec.width,
        spec.height,
        samples,
        16,
    ))
}

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

/// Full 2-D convolution with the kernel, reflect padding.
pub fn apply_psf(img: &GrayImage, psf: &Kernel2D) -> Result<GrayImage> {
    let (w, h) = (img.width(), img.height());
    let (hr, hc) = ((psf.rows / 2) as isize, (psf.cols / 2) as isize);
    let src = img.samples();
    let mut out = vec![0.0; w * h];
    for r in 0..h as isize {
        for c in 0..w as isize {
            let mut acc = 0.0;
            for kr in 0..psf.rows as isize {
                let rr = reflect(r + kr - hr, h);
                for kc in 0..psf.cols as isize {
                    let cc = reflect(c + kc - hc, w);
                    acc += psf.values[(kr * psf.cols as isize + kc) as usize] * src[rr * w + cc];
                }
            }
            out[(r as usize) * w + c as usize] = acc;
        }
    }
    Ok(GrayImage::from_samples_unchecked(
        w,
        h,
        out,
        img.source_depth(),
    ))
}

/// Directional Gaussian blur: sigma_x along X, then sigma_y along Y.
/// A sigma of zero skips that axis entirely.
pub fn apply_directional_blur(img: &GrayImage, spec: &DegradationSpec) -> Result<GrayImage> {
    if spec.blur_size % 2 == 0 {
        return Err(Error::BadKernelSize {
            size: spec.blur_size,
            min: 1,
        });
    }
    if spec.blur_sigma_x < 0.0 || spec.blur_sigma_y < 0.0 {
        return Err(Error::BadSigma(spec.blur_sigma_x.min(spec.blur_sigma_y)));
    }
    let mut out = img.clone();
    if spec.blur_sigma_x > 0.0 {
        out = crate::gradient::gaussian_blur_1d(&out, spec.blur_size, spec.blur_sigma_x, Axis::X)?;
    }
    if spec.blur_sigma_y > 0.0 {
        out = crate::gradient::gaussian_blur_1d(&out, spec.blur_size, spec.blur_sigma_y, Axis::Y)?;
    }
    Ok(out)
}

/// Add white Gaussian noise (std `noise_sigma`), clipped back to `[0, 1]`.
/// Deterministic per seed.
pub fn add_noise(img: &GrayImage, noise_sigma: f64, seed: u64) -> Result<GrayImage> {
    if noise_sigma < 0.0 {
        return Err(Error::BadSigma(noise_sigma));
    }
    if noise_sigma == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma).map_err(|_| Error::BadSigma(noise_sigma))?;
    let samples = img
        .samples()
        .iter()
        .map(|&s| (s + normal.sample(&mut rng)).clamp(0.0, 1.0))
        .collect();
    Ok(GrayImage::from_samples_unchecked(
        img.width(),
        img.height(),
        samples,
        img.source_depth(),
    ))
}

/// Degrade and score one scene.
pub fn evaluate_record(
    scene: &SceneSpec,
    degradation: &DegradationSpec,
    cfg: &MetricConfig,
) -> BenchRecord {
    let outcome = (|| -> Result<SharpnessReport> {
        let mut img = generate_scene(scene)?;
        if let Some(psf) = &degradation.psf {
            img = apply_psf(&img, psf)?;
        }
        img = apply_directional_blur(&img, degradation)?;
        // decorrelate noise across scenes sharing a degradation seed
        let noise_seed = degradation.seed ^ scene.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        img = add_noise(&img, degradation.noise_sigma, noise_seed)?;
        analyze(&img, cfg)
    })();
    match outcome {
        Ok(report) => BenchRecord {
            scene: scene.clone(),
            degradation: degradation.clone(),
            report: Some(report),
            error: None,
        },
        Err(e) => BenchRecord {
            scene: scene.clone(),
            degradation: degradation.clone(),
            report: None,
            error: Some(e.to_string()),
        },
    }
}

/// Evaluate the full scene x degradation cross product in parallel.
/// Per-record failures are recorded, not fatal, and the output order is the
/// input-index order regardless of scheduling.
pub fn run_sweep(
    scenes: &[SceneSpec],
    degradations: &[DegradationSpec],
    cfg: &MetricConfig,
) -> Vec<BenchRecord> {
    let jobs: Vec<(&SceneSpec, &DegradationSpec)> = scenes
        .iter()
        .flat_map(|s| degradations.iter().map(move |d| (s, d)))
        .collect();
    jobs.par_iter()
        .map(|(scene, degradation)| evaluate_record(scene, degradation, cfg))
        .collect()
}

/// Mean/std of scores grouped by one sigma level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaGroup {
    pub sigma: f64,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Correlation outcome for one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    /// Spearman rank correlation between the axis score and the axis sigma.
    pub rho: Option<f64>,
    pub error: Option<String>,
    pub per_sigma: Vec<SigmaGroup>,
}

/// Sweep statistics, optionally restricted to representative records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub filtered: bool,
    pub record_count: usize,
    pub x: AxisStats,
    pub y: AxisStats,
}

/// Average ranks (1-based), ties shared equally.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average-rank tie handling.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::NoRankVariation("need at least two paired samples"));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 {
        return Err(Error::NoRankVariation("first series is constant"));
    }
    if vy == 0.0 {
        return Err(Error::NoRankVariation("second series is constant"));
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    var.sqrt()
}

fn axis_stats(pairs: &[(f64, f64)]) -> AxisStats {
    // group scores by exact sigma value
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite sigma"));
    let mut per_sigma = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let sigma = sorted[i].0;
        let mut scores = Vec::new();
        while i < sorted.len() && sorted[i].0 == sigma {
            scores.push(sorted[i].1);
            i += 1;
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        per_sigma.push(SigmaGroup {
            sigma,
            mean,
            std: sample_std(&scores, mean),
            count: scores.len(),
        });
    }

    if per_sigma.len() < 3 {
        return AxisStats {
            rho: None,
            error: Some(
                Error::InsufficientSigmaLevels {
                    found: per_sigma.len(),
                }
                .to_string(),
            ),
            per_sigma,
        };
    }
    let sigmas: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let scores: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    match spearman(&sigmas, &scores) {
        Ok(rho) => AxisStats {
            rho: Some(rho),
            error: None,
            per_sigma,
        },
        Err(e) => AxisStats {
            rho: None,
            error: Some(e.to_string()),
            per_sigma,
        },
    }
}

/// Spearman correlation of score vs sigma per axis plus grouped dispersion.
///
/// With `filtered` set, only records representative on the axis contribute to
/// that axis. Errors if neither axis reaches three distinct sigma levels.
pub fn correlation_stats(records: &[BenchRecord], filtered: bool) -> Result<CorrelationSummary> {
    let mut x_pairs = Vec::new();
    let mut y_pairs = Vec::new();
    let mut counted = 0;
    for record in records {
        let Some(report) = &record.report else {
            continue;
        };
        counted += 1;
        if !filtered || report.representative_x {
            x_pairs.push((record.degradation.blur_sigma_x, report.s_x));
        }
        if !filtered || report.representative_y {
            y_pairs.push((record.degradation.blur_sigma_y, report.s_y));
        }
    }
    let x = axis_stats(&x_pairs);
    let y = axis_stats(&y_pairs);
    if x.per_sigma.len() < 3 && y.per_sigma.len() < 3 {
        return Err(Error::InsufficientSigmaLevels {
            found: x.per_sigma.len().max(y.per_sigma.len()),
        });
    }
    Ok(CorrelationSummary {
        filtered,
        record_count: counted,
        x,
        y,
    })
}

/// Fixed column order of the record CSV.
pub const RECORD_CSV_HEADER: [&str; 21] = [
    "width",
    "height",
    "block_size",
    "brightness",
    "contrast",
    "scene_seed",
    "psf",
    "blur_sigma_x",
    "blur_sigma_y",
    "blur_size",
    "noise_sigma",
    "noise_seed",
    "s_x",
    "s_y",
    "r_x",
    "r_y",
    "selected_count_x",
    "selected_count_y",
    "representative_x",
    "representative_y",
    "error",
];

fn record_fields(record: &BenchRecord) -> Vec<String> {
    let scene = &record.scene;
    let deg = &record.degradation;
    let mut fields = vec![
        scene.width.to_string(),
        scene.height.to_string(),
        scene.block_size.to_string(),
        scene.brightness.to_string(),
        scene.contrast.to_string(),
        scene.seed.to_string(),
        deg.psf.as_ref().map_or_else(|| "none".into(), Kernel2D::label),
        deg.blur_sigma_x.to_string(),
        deg.blur_sigma_y.to_string(),
        deg.blur_size.to_string(),
        deg.noise_sigma.to_string(),
        deg.seed.to_string(),
    ];
    match &record.report {
        Some(r) => fields.extend([
            r.s_x.to_string(),
            r.s_y.to_string(),
            r.r_x.to_string(),
            r.r_y.to_string(),
            r.selected_count_x.to_string(),
            r.selected_count_y.to_string(),
            r.representative_x.to_string(),
            r.representative_y.to_string(),
        ]),
        None => fields.extend(std::iter::repeat_n(String::new(), 8)),
    }
    fields.push(record.error.clone().unwrap_or_default());
    fields
}

/// Write records as CSV with the fixed header and column order.
pub fn write_records_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Io {
        path: PathBuf::from("<csv output>"),
        source: std::io::Error::other(e),
    };
    writer.write_record(RECORD_CSV_HEADER).map_err(io_err)?;
    for record in records {
        writer.write_record(record_fields(record)).map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: PathBuf::from("<csv output>"),
        source: e,
    })
}

/// Write records as JSON lines, one object per record, with the same fields
/// as the CSV (the psf column carries the kernel label, not its values).
pub fn write_records_jsonl<W: Write>(records: &[BenchRecord], mut out: W) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        path: PathBuf::from("<jsonl output>"),
        source: e,
    };
    for record in records {
        let fields = record_fields(record);
        let mut object = serde_json::Map::new();
        for (name, value) in RECORD_CSV_HEADER.iter().zip(&fields) {
            object.insert((*name).to_string(), serde_json::Value::String(value.clone()));
        }
        serde_json::to_writer(&mut out, &serde_json::Value::Object(object))
            .map_err(|e| io_err(std::io::Error::other(e)))?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    Ok(())
}

/// Declarative sweep description, loadable from JSON.
///
/// The default is the desk-scale sigma-correlation grid: 18 scenes x 18
/// degradations = 324 records at 512x512, low fixed noise, three noise
/// seeds. Noise-sensitivity studies raise `noise_sigmas` explicitly; mixing
/// strong noise into the correlation grid floors the scores at high sigma
/// and washes out the rank relationship.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchPlan {
    pub width: usize,
    pub height: usize,
    pub block_sizes: Vec<usize>,
    pub brightness_levels: Vec<f64>,
    pub contrast_levels: Vec<f64>,
    /// Paired directional sigmas: each level is applied along both axes.
    pub sigma_levels: Vec<f64>,
    pub noise_sigmas: Vec<f64>,
    pub noise_seeds: Vec<u64>,
    pub blur_size: usize,
    /// None: built-in 5x5 Gaussian (sigma 0.8). "none": no PSF.
    /// Anything else: path of a plain-text kernel file.
    pub psf: Option<String>,
    pub base_seed: u64,
    pub metric: MetricConfig,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            block_sizes: vec![10, 50, 100],
            brightness_levels: vec![0.2, 0.3, 0.4],
            contrast_levels: vec![0.35, 0.5],
            sigma_levels: vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0],
            noise_sigmas: vec![0.01],
            noise_seeds: vec![11, 12, 13],
            blur_size: 9,
            psf: None,
            base_seed: 7,
            metric: MetricConfig::default(),
        }
    }
}

impl BenchPlan {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig {
            field: "bench plan",
            reason: e.to_string(),
        })
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Expand the grids into concrete scene and degradation lists.
    pub fn expand(&self) -> Result<(Vec<SceneSpec>, Vec<DegradationSpec>)> {
        for (field, empty) in [
            ("block_sizes", self.block_sizes.is_empty()),
            ("brightness_levels", self.brightness_levels.is_empty()),
            ("contrast_levels", self.contrast_levels.is_empty()),
            ("sigma_levels", self.sigma_levels.is_empty()),
            ("noise_sigmas", self.noise_sigmas.is_empty()),
            ("noise_seeds", self.noise_seeds.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidConfig {
                    field: "bench plan",
                    reason: format!("{field} must not be empty"),
                });
            }
        }
        if self.blur_size % 2 == 0 {
            return Err(Error::BadKernelSize {
                size: self.blur_size,
                min: 1,
            });
        }

        let psf = match self.psf.as_deref() {
            None => Some(Kernel2D::gaussian(5, 0.8)?),
            Some("none") => None,
            Some(path) => Some(Kernel2D::from_file(Path::new(path))?),
        };

        let mut scenes = Vec::new();
        for &block_size in &self.block_sizes {
            for &brightness in &self.brightness_levels {
                for &contrast in &self.contrast_levels {
                    scenes.push(SceneSpec {
                        width: self.width,
                        height: self.height,
                        block_size,
                        brightness,
                        contrast,
                        seed: self.base_seed.wrapping_add(scenes.len() as u64),
                    });
                }
            }
        }

        let mut degradations = Vec::new();
        for &sigma in &self.sigma_levels {
            for &noise_sigma in &self.noise_sigmas {
                for &seed in &self.noise_seeds {
                    degradations.push(DegradationSpec {
                        psf: psf.clone(),
                        blur_sigma_x: sigma,
                        blur_sigma_y: sigma,
                        blur_size: self.blur_size,
                        noise_sigma,
                        seed,
                    });
                }
            }
        }
        Ok((scenes, degradations))
    }
}
