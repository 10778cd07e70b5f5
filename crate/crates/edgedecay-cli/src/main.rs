//! Command-line front end: single-image analysis, batch runs over
//! directories or manifests, the synthetic benchmark, and batch-CSV
//! summarization.
//!
//! Reports go to standard output, diagnostics to standard error. Exit codes:
//! 0 success, 1 input or configuration error, 2 policy rejection (image
//! non-representative on both axes under `--require-representative`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use edgedecay::bench::{
    correlation_stats, run_sweep, write_records_csv, write_records_jsonl, BenchPlan,
};
use edgedecay::{analyze, load_image, validate_config, MetricConfig, SharpnessReport};

mod batch;

use batch::{collect_inputs, summarize_rows, BatchRow, BATCH_CSV_HEADER};

#[derive(Parser)]
#[command(
    name = "edgedecay",
    version,
    about = "Direction-aware no-reference sharpness analysis for grayscale rasters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Score one image and print its report
    Analyze {
        /// 8- or 16-bit grayscale PNG or TIFF
        image: PathBuf,
        /// Metric config JSON; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report format on standard output
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Exit with code 2 when the image is non-representative on both axes
        #[arg(long)]
        require_representative: bool,
    },
    /// Score every image in a directory or manifest file
    Batch {
        /// Directory of images, or a text manifest with one image path per line
        input: PathBuf,
        /// Metric config JSON; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Destination of the per-image CSV
        #[arg(long)]
        output: PathBuf,
        /// Worker threads; defaults to available parallelism
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the synthetic degradation benchmark
    Bench {
        /// Bench plan JSON; the built-in desk-scale plan applies when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Destination of the record stream
        #[arg(long)]
        output: PathBuf,
        /// Record stream format: csv, or json for JSON lines
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Worker threads; defaults to available parallelism
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Recompute batch aggregates from an existing batch CSV
    Summarize {
        /// CSV previously produced by `batch`
        csv: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, String> {
    match command {
        Command::Analyze {
            image,
            config,
            format,
            require_representative,
        } => cmd_analyze(&image, config.as_deref(), format, require_representative),
        Command::Batch {
            input,
            config,
            output,
            jobs,
        } => cmd_batch(&input, config.as_deref(), &output, jobs),
        Command::Bench {
            config,
            output,
            format,
            jobs,
        } => cmd_bench(config.as_deref(), &output, format, jobs),
        Command::Summarize { csv } => cmd_summarize(&csv),
    }
}

fn load_config(path: Option<&Path>) -> Result<MetricConfig, String> {
    match path {
        Some(path) => MetricConfig::from_json_file(path).map_err(|e| e.to_string()),
        None => validate_config(MetricConfig::default()).map_err(|e| e.to_string()),
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, body: impl FnOnce() -> T + Send) -> Result<T, String> {
    match jobs {
        None => Ok(body()),
        Some(0) => Err("--jobs must be at least 1".into()),
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| e.to_string())?;
            Ok(pool.install(body))
        }
    }
}

fn report_csv_row(path: &str, report: Option<&SharpnessReport>, error: Option<&str>) -> Vec<String> {
    let mut fields = vec![path.to_string()];
    match report {
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
    fields.push(error.unwrap_or_default().to_string());
    fields
}

fn cmd_analyze(
    image: &Path,
    config: Option<&Path>,
    format: OutputFormat,
    require_representative: bool,
) -> Result<u8, String> {
    let cfg = load_config(config)?;
    let raster = load_image(image).map_err(|e| e.to_string())?;
    match analyze(&raster, &cfg) {
        Ok(report) => {
            match format {
                OutputFormat::Json => {
                    println!(
                        "{}",
                        serde_json::to_string(&report).map_err(|e| e.to_string())?
                    );
                }
                OutputFormat::Csv => {
                    let mut writer = csv::Writer::from_writer(std::io::stdout());
                    writer
                        .write_record(BATCH_CSV_HEADER)
                        .and_then(|()| {
                            writer.write_record(report_csv_row(
                                &image.display().to_string(),
                                Some(&report),
                                None,
                            ))
                        })
                        .map_err(|e| e.to_string())?;
                    writer.flush().map_err(|e| e.to_string())?;
                }
            }
            if require_representative && !report.representative_x && !report.representative_y {
                eprintln!("image is non-representative on both axes");
                return Ok(2);
            }
            Ok(0)
        }
        Err(e) if e.is_content_limited() && require_representative => {
            eprintln!("image is non-representative: {e}");
            Ok(2)
        }
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_batch(
    input: &Path,
    config: Option<&Path>,
    output: &Path,
    jobs: Option<usize>,
) -> Result<u8, String> {
    use rayon::prelude::*;

    let cfg = load_config(config)?;
    let paths = collect_inputs(input)?;
    if paths.is_empty() {
        return Err(format!("no input images found in {}", input.display()));
    }

    let rows: Vec<BatchRow> = with_pool(jobs, || {
        paths
            .par_iter()
            .map(|path| {
                let outcome = load_image(path).and_then(|raster| analyze(&raster, &cfg));
                match outcome {
                    Ok(report) => BatchRow {
                        path: path.display().to_string(),
                        report: Some(report),
                        error: None,
                    },
                    Err(e) => BatchRow {
                        path: path.display().to_string(),
                        report: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    })?;

    let file = std::fs::File::create(output)
        .map_err(|e| format!("cannot create {}: {e}", output.display()))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(BATCH_CSV_HEADER)
        .map_err(|e| e.to_string())?;
    for row in &rows {
        writer
            .write_record(report_csv_row(
                &row.path,
                row.report.as_ref(),
                row.error.as_deref(),
            ))
            .map_err(|e| e.to_string())?;
    }
    writer.flush().map_err(|e| e.to_string())?;

    let summary = summarize_rows(&rows);
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?
    );

    if summary.count == 0 {
        eprintln!("no image could be analyzed");
        return Ok(1);
    }
    Ok(0)
}

fn cmd_bench(
    config: Option<&Path>,
    output: &Path,
    format: OutputFormat,
    jobs: Option<usize>,
) -> Result<u8, String> {
    let plan = match config {
        Some(path) => BenchPlan::from_json_file(path).map_err(|e| e.to_string())?,
        None => BenchPlan::default(),
    };
    let cfg = validate_config(plan.metric.clone()).map_err(|e| e.to_string())?;
    let (scenes, degradations) = plan.expand().map_err(|e| e.to_string())?;

    let records = with_pool(jobs, || run_sweep(&scenes, &degradations, &cfg))?;

    let file = std::fs::File::create(output)
        .map_err(|e| format!("cannot create {}: {e}", output.display()))?;
    match format {
        OutputFormat::Csv => write_records_csv(&records, file).map_err(|e| e.to_string())?,
        OutputFormat::Json => write_records_jsonl(&records, file).map_err(|e| e.to_string())?,
    }

    let stats_block = |filtered: bool| match correlation_stats(&records, filtered) {
        Ok(summary) => serde_json::to_value(summary).unwrap_or_else(|e| {
            serde_json::json!({ "error": format!("serialization failed: {e}") })
        }),
        Err(e) => serde_json::json!({ "error": e.to_string() }),
    };
    let stats = serde_json::json!({
        "unfiltered": stats_block(false),
        "filtered": stats_block(true),
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&stats).map_err(|e| e.to_string())?
    );
    Ok(0)
}

fn cmd_summarize(csv_path: &Path) -> Result<u8, String> {
    let mut reader = csv::Reader::from_path(csv_path)
        .map_err(|e| format!("cannot read {}: {e}", csv_path.display()))?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != BATCH_CSV_HEADER {
        return Err(format!(
            "unexpected CSV header in {}; want {}",
            csv_path.display(),
            BATCH_CSV_HEADER.join(",")
        ));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        rows.push(BatchRow::from_csv_record(&record)?);
    }
    let summary = summarize_rows(&rows);
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?
    );
    Ok(0)
}
