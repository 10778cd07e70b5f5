//! Batch input discovery and aggregate statistics.

use std::path::{Path, PathBuf};

use serde::Serialize;

use edgedecay::SharpnessReport;

/// Fixed column order of the batch CSV (also used by `analyze --format csv`).
pub const BATCH_CSV_HEADER: [&str; 10] = [
    "path",
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

/// One scored input: either a report or the error that prevented one.
pub struct BatchRow {
    pub path: String,
    pub report: Option<SharpnessReport>,
    pub error: Option<String>,
}

impl BatchRow {
    /// Rebuild a row from a CSV record with the `BATCH_CSV_HEADER` layout.
    pub fn from_csv_record(record: &csv::StringRecord) -> Result<Self, String> {
        if record.len() != BATCH_CSV_HEADER.len() {
            return Err(format!("CSV row has {} fields, want 10", record.len()));
        }
        let field = |i: usize| record.get(i).unwrap_or_default();
        let path = field(0).to_string();
        let error = field(9);
        if field(1).is_empty() {
            return Ok(BatchRow {
                path,
                report: None,
                error: Some(error.to_string()),
            });
        }
        let parse_f64 = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|e| format!("bad number in column {}: {e}", BATCH_CSV_HEADER[i]))
        };
        let parse_usize = |i: usize| {
            field(i)
                .parse::<usize>()
                .map_err(|e| format!("bad count in column {}: {e}", BATCH_CSV_HEADER[i]))
        };
        let parse_bool = |i: usize| {
            field(i)
                .parse::<bool>()
                .map_err(|e| format!("bad flag in column {}: {e}", BATCH_CSV_HEADER[i]))
        };
        Ok(BatchRow {
            path,
            report: Some(SharpnessReport {
                s_x: parse_f64(1)?,
                s_y: parse_f64(2)?,
                r_x: parse_f64(3)?,
                r_y: parse_f64(4)?,
                selected_count_x: parse_usize(5)?,
                selected_count_y: parse_usize(6)?,
                representative_x: parse_bool(7)?,
                representative_y: parse_bool(8)?,
            }),
            error: (!error.is_empty()).then(|| error.to_string()),
        })
    }
}

/// Batch aggregates. Score statistics are computed per axis over the images
/// representative on that axis only; `null` when no image qualifies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    /// Images that produced a report.
    pub count: usize,
    /// Images that failed to decode or analyze.
    pub failed: usize,
    pub representative_count_x: usize,
    pub representative_count_y: usize,
    pub mean_s_x: Option<f64>,
    pub median_s_x: Option<f64>,
    pub std_s_x: Option<f64>,
    pub mean_s_y: Option<f64>,
    pub median_s_y: Option<f64>,
    pub std_s_y: Option<f64>,
}

fn stats(values: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None, None);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    (Some(mean), Some(median), Some(std))
}

/// Aggregate scored rows into the batch summary.
pub fn summarize_rows(rows: &[BatchRow]) -> BatchSummary {
    let reports: Vec<&SharpnessReport> = rows.iter().filter_map(|r| r.report.as_ref()).collect();
    let s_x: Vec<f64> = reports
        .iter()
        .filter(|r| r.representative_x)
        .map(|r| r.s_x)
        .collect();
    let s_y: Vec<f64> = reports
        .iter()
        .filter(|r| r.representative_y)
        .map(|r| r.s_y)
        .collect();
    let (mean_s_x, median_s_x, std_s_x) = stats(&s_x);
    let (mean_s_y, median_s_y, std_s_y) = stats(&s_y);
    BatchSummary {
        count: reports.len(),
        failed: rows.len() - reports.len(),
        representative_count_x: s_x.len(),
        representative_count_y: s_y.len(),
        mean_s_x,
        median_s_x,
        std_s_x,
        mean_s_y,
        median_s_y,
        std_s_y,
    }
}

/// Expand a batch input into image paths.
///
/// A directory yields its PNG/TIFF entries sorted by file name; any other
/// path is read as a manifest, one image path per line (relative paths
/// resolve against the manifest's directory, `#` starts a comment).
pub fn collect_inputs(input: &Path) -> Result<Vec<PathBuf>, String> {
    if input.is_dir() {
        let mut paths = Vec::new();
        let entries = std::fs::read_dir(input)
            .map_err(|e| format!("cannot list {}: {e}", input.display()))?;
        for entry in entries {
            let path = entry.map_err(|e| e.to_string())?.path();
            let ext = path
                .extension()
                .and_then(|e| e.to_str())
                .map(str::to_ascii_lowercase);
            if matches!(ext.as_deref(), Some("png" | "tif" | "tiff")) {
                paths.push(path);
            }
        }
        paths.sort();
        Ok(paths)
    } else {
        let text = std::fs::read_to_string(input)
            .map_err(|e| format!("cannot read manifest {}: {e}", input.display()))?;
        let base = input.parent().unwrap_or(Path::new("."));
        Ok(text
            .lines()
            .map(str::trim)
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(|line| {
                let path = Path::new(line);
                if path.is_absolute() {
                    path.to_path_buf()
                } else {
                    base.join(path)
                }
            })
            .collect())
    }
}
