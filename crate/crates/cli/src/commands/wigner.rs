use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use squeeze_core::wigner::{wigner_eval, GridSpec};
use squeeze_core::VarianceConvention;

use crate::args::{load_config, overlay, require, DbPair, OutputArgs};
use crate::error::{FieldContext, Result};
use crate::format::{Format, Table};

/// Variance convention of the phase-space coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Vacuum variance 1/4.
    Quarter,
    /// Vacuum variance 1/2.
    Half,
    /// Vacuum variance 1.
    Unity,
}

impl From<Convention> for VarianceConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Quarter => VarianceConvention::Quarter,
            Convention::Half => VarianceConvention::Half,
            Convention::Unity => VarianceConvention::Unity,
        }
    }
}

/// Wigner function of a squeezed state on a grid, with its projections.
#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct WignerArgs {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// State as `v1_db,v2_db`.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<DbPair>,
    #[arg(long, value_enum)]
    pub convention: Option<Convention>,
    /// Half-width of the grid in standard deviations of each quadrature.
    #[arg(long)]
    pub sigmas: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    convention: &'static str,
    v1: f64,
    v2: f64,
    normalization: f64,
    x1: &'a [f64],
    x2: &'a [f64],
    /// Row-major, rows along `x1`.
    w: &'a [f64],
    marginal_x1: Vec<f64>,
    marginal_x2: Vec<f64>,
    marginal_variance_x1: f64,
    marginal_variance_x2: f64,
}

pub fn run(mut args: WignerArgs, provenance: bool) -> Result<()> {
    let file: WignerArgs = load_config(args.config.as_deref())?;
    overlay!(args, file; state, convention, sigmas, points);
    args.output.overlay(file.output);

    let convention = args.convention.unwrap_or(Convention::Unity).into();
    let state = require(args.state, "state")?
        .state("state")?
        .to_convention(convention);
    let sigmas = args.sigmas.unwrap_or(6.0);
    let points = args.points.unwrap_or(201);
    let grid = GridSpec::covering(&state, sigmas, points);
    let w = wigner_eval(&state, &grid).field("grid")?;

    let report = Report {
        convention: convention.name(),
        v1: state.v1(),
        v2: state.v2(),
        normalization: w.integral(),
        x1: &w.x1_axis,
        x2: &w.x2_axis,
        w: &w.values,
        marginal_x1: w.marginal_x1(),
        marginal_x2: w.marginal_x2(),
        marginal_variance_x1: w.marginal_variance_x1(),
        marginal_variance_x2: w.marginal_variance_x2(),
    };
    println!(
        "{} convention: normalization {:.9}, marginal variances {:.6e} / {:.6e} (state {:.6e} / {:.6e})",
        report.convention,
        report.normalization,
        report.marginal_variance_x1,
        report.marginal_variance_x2,
        report.v1,
        report.v2
    );

    let sink = args.output.sink("wigner", provenance);
    match sink.format {
        Format::Json => {
            sink.write_json("", &report)?;
        }
        Format::Csv => {
            let mut meta = Table::default();
            meta.meta("convention", report.convention)
                .meta_float("v1", report.v1)
                .meta_float("v2", report.v2)
                .meta_float("normalization", report.normalization);
            let mut grid = Table::new(&["x1", "x2", "w"]);
            grid.metadata = meta.metadata.clone();
            for (i, &x1) in w.x1_axis.iter().enumerate() {
                for (j, &x2) in w.x2_axis.iter().enumerate() {
                    grid.push(vec![x1.into(), x2.into(), w.at(i, j).into()]);
                }
            }
            sink.write_csv("grid", &grid)?;
            let mut marginals = Table::new(&["axis", "x", "density"]);
            marginals.metadata = meta.metadata;
            marginals
                .meta_float("marginal_variance_x1", report.marginal_variance_x1)
                .meta_float("marginal_variance_x2", report.marginal_variance_x2);
            for (&x, &p) in w.x1_axis.iter().zip(&report.marginal_x1) {
                marginals.push(vec!["x1".into(), x.into(), p.into()]);
            }
            for (&x, &p) in w.x2_axis.iter().zip(&report.marginal_x2) {
                marginals.push(vec!["x2".into(), x.into(), p.into()]);
            }
            sink.write_csv("marginals", &marginals)?;
        }
    }
    Ok(())
}
