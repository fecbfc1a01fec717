use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use squeeze_core::homodyne::{
    estimate_variance, simulate, sweep_trace, HomodyneConfig, HomodyneTrace, SweepPoint,
};
use squeeze_core::linear_to_db;

use crate::args::{DbPair, OutputArgs};
use crate::error::{FieldContext, Result};
use crate::format::{read_json, Cell, Format, Table};

/// Synthetic homodyne data and variance estimates.
#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// JSON simulation config.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the dark-noise level in the config, dB relative to vacuum.
    #[arg(long, allow_hyphen_values = true)]
    pub dark_noise_db: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// One phase segment of the schedule.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseStep {
    /// Local-oscillator phase, radians.
    pub theta: f64,
    pub samples: usize,
}

/// Linear phase ramp analysed in windows.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Radians per sample.
    pub rotation_rate: f64,
    pub total_samples: usize,
    pub window: usize,
}

/// Schema of the `--config` file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    /// `[v1_db, v2_db]`.
    pub state_db: DbPair,
    pub phase_schedule: Vec<PhaseStep>,
    #[serde(default)]
    pub dark_noise_db: Option<f64>,
    /// Length of the vacuum reference; defaults to the longest segment.
    #[serde(default)]
    pub reference_samples: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub stem: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Serialize)]
struct EstimateRow {
    segment_index: usize,
    theta_radians: f64,
    samples: usize,
    variance: f64,
    std_error: f64,
    variance_db: f64,
    expected_variance: f64,
}

#[derive(Debug, Serialize)]
struct SweepRow {
    theta_radians: f64,
    variance: f64,
    std_error: f64,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    state_db: (f64, f64),
    dark_noise_db: Option<f64>,
    seed: u64,
    generator: &'static str,
    estimates: &'a [EstimateRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<SweepRow>>,
    segments: Vec<(f64, &'a [f64])>,
    vacuum_reference: &'a [f64],
}

pub fn run(mut args: SimulateArgs, provenance: bool) -> Result<()> {
    let file: SimulationFile = read_json(&args.config)?;
    let seed = args.seed.unwrap_or(file.seed);
    let dark_noise_db = args.dark_noise_db.or(file.dark_noise_db);
    args.output.overlay(OutputArgs {
        output_dir: file.output_dir.clone(),
        stem: file.stem.clone(),
        format: file.format,
    });

    let state = file.state_db.state("state_db")?;
    let schedule: Vec<(f64, usize)> = file
        .phase_schedule
        .iter()
        .map(|s| (s.theta, s.samples))
        .collect();
    let reference_samples = file
        .reference_samples
        .or_else(|| schedule.iter().map(|s| s.1).max())
        .unwrap_or(0);
    let config = HomodyneConfig::new(state, schedule, dark_noise_db, reference_samples, seed)
        .field("phase_schedule")?;
    let trace = simulate(&config);
    let dark = config.dark_variance();

    let estimates = trace
        .segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let e = estimate_variance(&seg.samples, &trace.vacuum_reference, dark_noise_db)
                .field("dark_noise_db")?;
            Ok(EstimateRow {
                segment_index: i,
                theta_radians: seg.theta,
                samples: seg.samples.len(),
                variance: e.value,
                std_error: e.std_error,
                variance_db: e.db(),
                expected_variance: config.state().quadrature_variance(seg.theta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for e in &estimates {
        println!(
            "segment {} (theta {:.4}): {:+.4} dB, variance {:.6} +- {:.6} (expected {:.6})",
            e.segment_index,
            e.theta_radians,
            e.variance_db,
            e.variance,
            e.std_error,
            e.expected_variance
        );
    }
    let sweep = file
        .sweep
        .map(|s| {
            sweep_trace(
                config.state(),
                s.rotation_rate,
                s.total_samples,
                s.window,
                seed,
            )
            .field("sweep")
        })
        .transpose()?;
    if let Some(points) = &sweep {
        if let Some((min, max)) = extremes(points) {
            println!(
                "sweep: {} windows, min {:+.3} dB at {:.4} rad, max {:+.3} dB at {:.4} rad",
                points.len(),
                linear_to_db(min.estimate.value),
                min.theta,
                linear_to_db(max.estimate.value),
                max.theta
            );
        }
    }

    let sink = args.output.sink("simulate", provenance);
    let sweep_rows = sweep.as_ref().map(|pts| {
        pts.iter()
            .map(|p| SweepRow {
                theta_radians: p.theta,
                variance: p.estimate.value,
                std_error: p.estimate.std_error,
            })
            .collect::<Vec<_>>()
    });
    match sink.format {
        Format::Json => {
            let report = Report {
                state_db: (file.state_db.0, file.state_db.1),
                dark_noise_db,
                seed,
                generator: trace.generator,
                estimates: &estimates,
                sweep: sweep_rows,
                segments: trace
                    .segments
                    .iter()
                    .map(|s| (s.theta, s.samples.as_slice()))
                    .collect(),
                vacuum_reference: &trace.vacuum_reference,
            };
            sink.write_json("", &report)?;
        }
        Format::Csv => {
            let mut meta = Table::default();
            meta.meta(
                "state_db",
                format!("{}, {}", file.state_db.0, file.state_db.1),
            )
            .meta(
                "dark_noise_db",
                dark_noise_db.map_or("none".to_owned(), |d| d.to_string()),
            )
            .meta_float("dark_variance", dark)
            .meta("seed", seed)
            .meta("generator", trace.generator);
            write_trace(&sink, &meta, &trace)?;
            let mut t = Table::new(&[
                "segment_index",
                "theta_radians",
                "samples",
                "variance",
                "std_error",
                "variance_db",
                "expected_variance",
            ]);
            t.metadata = meta.metadata.clone();
            for e in &estimates {
                t.push(vec![
                    e.segment_index.into(),
                    e.theta_radians.into(),
                    e.samples.into(),
                    e.variance.into(),
                    e.std_error.into(),
                    e.variance_db.into(),
                    e.expected_variance.into(),
                ]);
            }
            sink.write_csv("estimates", &t)?;
            if let (Some(rows), Some(spec)) = (&sweep_rows, file.sweep) {
                let mut t = Table::new(&["theta_radians", "variance", "std_error"]);
                t.metadata = meta.metadata;
                t.meta_float("rotation_rate", spec.rotation_rate)
                    .meta("window", spec.window);
                for r in rows {
                    t.push(vec![
                        r.theta_radians.into(),
                        r.variance.into(),
                        r.std_error.into(),
                    ]);
                }
                sink.write_csv("sweep", &t)?;
            }
        }
    }
    println!("wrote {} outputs to {}", sink.stem, sink.dir.display());
    Ok(())
}

fn extremes(points: &[SweepPoint]) -> Option<(&SweepPoint, &SweepPoint)> {
    let min = points
        .iter()
        .min_by(|a, b| a.estimate.value.total_cmp(&b.estimate.value))?;
    let max = points
        .iter()
        .max_by(|a, b| a.estimate.value.total_cmp(&b.estimate.value))?;
    Some((min, max))
}

fn write_trace(sink: &crate::format::Sink, meta: &Table, trace: &HomodyneTrace) -> Result<()> {
    let rows = trace.segments.iter().enumerate().flat_map(|(i, seg)| {
        seg.samples
            .iter()
            .map(move |&x| vec![Cell::from(i), seg.theta.into(), x.into()])
    });
    sink.write_csv_rows(
        "trace",
        &meta.metadata,
        &["segment_index", "theta_radians", "sample_value"],
        rows,
    )?;
    let rows = trace.vacuum_reference.iter().map(|&x| vec![Cell::from(x)]);
    sink.write_csv_rows("reference", &meta.metadata, &["sample_value"], rows)?;
    Ok(())
}
