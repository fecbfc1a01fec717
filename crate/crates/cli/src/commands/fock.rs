use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use squeeze_core::fock::{
    density_matrix, oracle_density_matrix, photon_distribution, DensityMatrix, DEFAULT_TRUNCATION,
};
use squeeze_core::presets;

use crate::args::{load_config, overlay, DbPair, OutputArgs, Preset};
use crate::error::{CliError, FieldContext, Result};
use crate::format::{Format, Sink, Table};

/// Largest entry difference tolerated by `--verify-oracle`.
pub const ORACLE_TOLERANCE: f64 = 1e-4;

type Table11 = [[f64; 11]; 11];

/// Photon-number density matrix and distribution of a squeezed state.
#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct FockArgs {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// State as `v1_db,v2_db`.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<DbPair>,
    /// Run the three matrix states of a preset and compare with its tables.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Largest photon number used in the computation.
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Largest photon number written out (defaults to the truncation).
    #[arg(long)]
    pub keep: Option<usize>,
    /// Divide the computed block by its trace before cutting it down.
    #[arg(long)]
    pub renormalize: bool,
    /// Recompute the written block by the independent squeezed-thermal
    /// route and fail if any entry differs by more than 1e-4.
    #[arg(long)]
    pub verify_oracle: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct StateInfo {
    v1_db: f64,
    v2_db: f64,
    v1: f64,
    v2: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    state: StateInfo,
    truncation: usize,
    kept: usize,
    renormalized: bool,
    trace_deficit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_max_abs_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table_max_abs_diff: Option<f64>,
    entries: Vec<(usize, usize, f64)>,
    probabilities: Vec<f64>,
}

pub fn run(mut args: FockArgs, provenance: bool) -> Result<()> {
    let file: FockArgs = load_config(args.config.as_deref())?;
    overlay!(args, file; state, preset, truncation, keep);
    args.renormalize |= file.renormalize;
    args.verify_oracle |= file.verify_oracle;
    args.output.overlay(file.output);

    let truncation = args.truncation.unwrap_or(DEFAULT_TRUNCATION);
    if truncation == 0 {
        return Err(CliError::invalid("truncation", "must be at least 1"));
    }
    let keep = args.keep.unwrap_or(truncation);
    if keep > truncation {
        return Err(CliError::invalid(
            "keep",
            format!("{keep} exceeds the truncation {truncation}"),
        ));
    }
    let stem = args
        .output
        .stem
        .clone()
        .unwrap_or_else(|| "fock".to_owned());

    let jobs: Vec<(String, DbPair, Option<&Table11>)> = match (args.preset, args.state) {
        (Some(Preset::Paper), _) => presets::MATRIX_STATES_DB
            .iter()
            .zip(&presets::MATRICES)
            .enumerate()
            .map(|(i, (&(a, b), table))| (format!("{stem}_{}", i + 1), DbPair(a, b), Some(table)))
            .collect(),
        (None, Some(pair)) => vec![(stem, pair, None)],
        (None, None) => return Err(CliError::invalid("state", "give --state or --preset")),
    };

    for (job_stem, pair, table) in jobs {
        let mut sink = args.output.sink(&job_stem, provenance);
        sink.stem = job_stem;
        let state = pair.state("state")?;
        let raw = density_matrix(&state, truncation);
        let full = if args.renormalize {
            raw.renormalized()
        } else {
            raw.clone()
        };
        let rho = full.truncated(keep);
        let oracle_max_abs_diff = if args.verify_oracle {
            // the oracle checks the formula itself, before any renormalization
            let oracle = oracle_density_matrix(&state, keep).field("state")?;
            Some(max_abs_diff(&raw.truncated(keep), &oracle.matrix))
        } else {
            None
        };
        let table_max_abs_diff = table.map(|t| {
            let n = keep.min(10) + 1;
            (0..n)
                .flat_map(|m| (0..n).map(move |k| (m, k)))
                .map(|(m, k)| (rho.get(m, k) - t[m][k]).abs())
                .fold(0.0, f64::max)
        });
        let report = Report {
            state: StateInfo {
                v1_db: pair.0,
                v2_db: pair.1,
                v1: state.v1(),
                v2: state.v2(),
            },
            truncation,
            kept: keep,
            renormalized: args.renormalize,
            trace_deficit: raw.trace_deficit(),
            oracle_max_abs_diff,
            table_max_abs_diff,
            entries: rho.non_zero().collect(),
            probabilities: photon_distribution(&rho).probabilities().to_vec(),
        };
        write(&sink, &report)?;
        print!(
            "({:+.2}, {:+.2}) dB: N = {truncation}, trace deficit {:.3e}",
            pair.0, pair.1, report.trace_deficit
        );
        if let Some(d) = table_max_abs_diff {
            print!(", max |diff| vs table {d:.2e}");
        }
        if let Some(d) = oracle_max_abs_diff {
            print!(", max |diff| vs oracle {d:.2e}");
        }
        println!();
        if let Some(d) = oracle_max_abs_diff {
            if d > ORACLE_TOLERANCE {
                return Err(CliError::Convergence(format!(
                    "closed form and oracle differ by {d:.3e} (> {ORACLE_TOLERANCE:e})"
                )));
            }
        }
    }
    Ok(())
}

fn max_abs_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn write(sink: &Sink, report: &Report) -> Result<()> {
    match sink.format {
        Format::Json => {
            sink.write_json("", report)?;
        }
        Format::Csv => {
            let mut meta = Table::default();
            meta.meta(
                "state_db",
                format!("{}, {}", report.state.v1_db, report.state.v2_db),
            )
            .meta("truncation", report.truncation)
            .meta("kept", report.kept)
            .meta("renormalized", report.renormalized)
            .meta_float("trace_deficit", report.trace_deficit);
            if let Some(d) = report.oracle_max_abs_diff {
                meta.meta_float("oracle_max_abs_diff", d);
            }
            if let Some(d) = report.table_max_abs_diff {
                meta.meta_float("table_max_abs_diff", d);
            }
            let mut rho = Table::new(&["row", "col", "value"]);
            rho.metadata = meta.metadata.clone();
            for &(m, n, v) in &report.entries {
                rho.push(vec![m.into(), n.into(), v.into()]);
            }
            sink.write_csv("density", &rho)?;
            let mut pn = Table::new(&["n", "probability"]);
            pn.metadata = meta.metadata;
            for (n, &p) in report.probabilities.iter().enumerate() {
                pn.push(vec![n.into(), p.into()]);
            }
            sink.write_csv("pn", &pn)?;
        }
    }
    Ok(())
}
