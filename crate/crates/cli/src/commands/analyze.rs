use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use squeeze_core::{infer_loss, linear_to_db, mean_photon_number, presets, purity};

use crate::args::{load_config, DbPair, OutputArgs, Preset};
use crate::error::{CliError, FieldContext, Result};
use crate::format::{Format, Table};

/// Infer the common loss of measured squeezed states.
#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct AnalyzeArgs {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Measured pair `v1_db,v2_db`; repeat for several states.
    #[arg(long = "pair", allow_hyphen_values = true)]
    pub pairs: Vec<DbPair>,
    /// Use the measured pairs of a built-in preset.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct PairReport {
    v1_db: f64,
    v2_db: f64,
    pure_v1_db: f64,
    pure_v2_db: f64,
    purity: f64,
    mean_photon_number: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    eta_gamma: f64,
    vacuum_admixture: f64,
    objective: f64,
    pairs: Vec<PairReport>,
}

pub fn run(mut args: AnalyzeArgs, provenance: bool) -> Result<()> {
    let file: AnalyzeArgs = load_config(args.config.as_deref())?;
    if args.pairs.is_empty() {
        args.pairs = file.pairs;
    }
    args.preset = args.preset.or(file.preset);
    args.output.overlay(file.output);

    let mut pairs = Vec::new();
    if let Some(Preset::Paper) = args.preset {
        pairs.extend(
            presets::MEASURED_PAIRS_DB
                .iter()
                .map(|&(a, b)| DbPair(a, b)),
        );
    }
    pairs.extend(args.pairs.iter().copied());
    if pairs.is_empty() {
        return Err(CliError::invalid(
            "pair",
            "give at least one --pair or --preset",
        ));
    }
    let states = pairs
        .iter()
        .map(|p| p.state("pair"))
        .collect::<Result<Vec<_>>>()?;
    let estimate = infer_loss(&states).field("pair")?;

    let report = Report {
        eta_gamma: estimate.loss.eta_gamma(),
        vacuum_admixture: estimate.loss.vacuum_admixture(),
        objective: estimate.objective,
        pairs: pairs
            .iter()
            .zip(&states)
            .zip(&estimate.pure_states)
            .map(|((p, s), pure)| PairReport {
                v1_db: p.0,
                v2_db: p.1,
                pure_v1_db: linear_to_db(pure.v1()),
                pure_v2_db: linear_to_db(pure.v2()),
                purity: purity(s),
                mean_photon_number: mean_photon_number(s),
            })
            .collect(),
    };

    println!(
        "eta_gamma = {:.5}, vacuum admixture = {:.2}%",
        report.eta_gamma,
        100.0 * report.vacuum_admixture
    );
    for p in &report.pairs {
        println!(
            "  ({:+.2}, {:+.2}) dB -> pure ({:+.2}, {:+.2}) dB, purity {:.4}, <n> {:.4}",
            p.v1_db, p.v2_db, p.pure_v1_db, p.pure_v2_db, p.purity, p.mean_photon_number
        );
    }

    let sink = args.output.sink("analyze", provenance);
    let path = match sink.format {
        Format::Json => sink.write_json("", &report)?,
        Format::Csv => {
            let mut t = Table::new(&[
                "pair",
                "v1_db",
                "v2_db",
                "pure_v1_db",
                "pure_v2_db",
                "purity",
                "mean_photon_number",
            ]);
            t.meta_float("eta_gamma", report.eta_gamma)
                .meta_float("vacuum_admixture", report.vacuum_admixture)
                .meta_float("objective", report.objective);
            for (i, p) in report.pairs.iter().enumerate() {
                t.push(vec![
                    i.into(),
                    p.v1_db.into(),
                    p.v2_db.into(),
                    p.pure_v1_db.into(),
                    p.pure_v2_db.into(),
                    p.purity.into(),
                    p.mean_photon_number.into(),
                ]);
            }
            sink.write_csv("", &t)?
        }
    };
    println!("wrote {}", path.display());
    Ok(())
}
