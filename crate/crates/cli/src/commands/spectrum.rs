use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use squeeze_core::spectrum::{
    fit_spectrum, half_point_variance, spectral_photon_rate, squeezing_bandwidth, FitStatus,
    FitTraces, SpectrumData, SpectrumModel,
};
use squeeze_core::{db_to_linear, fock::DEFAULT_TRUNCATION, linear_to_db, presets};

use crate::args::{load_config, overlay, require, OutputArgs, Preset};
use crate::error::{CliError, FieldContext, Result};
use crate::format::{read_csv, Format, Table};

const MHZ: f64 = 1e6;

/// OPO squeezing spectrum.
#[derive(Debug, clap::Subcommand)]
pub enum SpectrumCommand {
    /// Model variances over a frequency range.
    Eval(EvalArgs),
    /// Fit the model to measured spectra.
    Fit(FitArgs),
    /// Frequency where squeezing has dropped to half its zero-frequency depth.
    Bandwidth(BandwidthArgs),
    /// Photon flux and photon-number statistics summed over frequency bins.
    Rate(RateArgs),
}

/// OPO parameters; explicit values override the preset.
#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Pump power relative to threshold.
    #[arg(long)]
    pub pump_ratio: Option<f64>,
    /// Total detection and escape efficiency.
    #[arg(long)]
    pub eta_gamma: Option<f64>,
    /// Cavity decay rate, 1/s.
    #[arg(long)]
    pub kappa: Option<f64>,
}

impl ModelArgs {
    fn overlay(&mut self, file: ModelArgs) {
        overlay!(self, file; preset, pump_ratio, eta_gamma, kappa);
    }

    fn model(&self) -> Result<SpectrumModel> {
        let base = self.preset.map(|Preset::Paper| presets::spectrum_model());
        let pick =
            |v: Option<f64>, from_preset: Option<f64>, name: &str| require(v.or(from_preset), name);
        let pump = pick(self.pump_ratio, base.map(|m| m.pump_ratio()), "pump-ratio")?;
        let eta = pick(self.eta_gamma, base.map(|m| m.eta_gamma()), "eta-gamma")?;
        let kappa = pick(self.kappa, base.map(|m| m.kappa()), "kappa")?;
        match base {
            Some(m) if (pump, eta, kappa) == (m.pump_ratio(), m.eta_gamma(), m.kappa()) => Ok(m),
            _ => SpectrumModel::new(pump, eta, kappa).field("model"),
        }
    }
}

#[derive(Debug, Serialize)]
struct ModelReport {
    pump_ratio: f64,
    eta_gamma: f64,
    kappa: f64,
}

impl From<&SpectrumModel> for ModelReport {
    fn from(m: &SpectrumModel) -> Self {
        Self {
            pump_ratio: m.pump_ratio(),
            eta_gamma: m.eta_gamma(),
            kappa: m.kappa(),
        }
    }
}

fn model_meta(t: &mut Table, m: &SpectrumModel) {
    t.meta_float("pump_ratio", m.pump_ratio())
        .meta_float("eta_gamma", m.eta_gamma())
        .meta_float("kappa", m.kappa());
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct EvalArgs {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Evaluate at these frequencies (MHz) instead of a range.
    #[arg(long = "at-mhz", value_delimiter = ',')]
    pub at_mhz: Vec<f64>,
    /// Lowest frequency of the range, MHz.
    #[arg(long)]
    pub f_min_mhz: Option<f64>,
    /// Highest frequency of the range, MHz.
    #[arg(long)]
    pub f_max_mhz: Option<f64>,
    /// Points in the range.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    model: ModelReport,
    f_hz: Vec<f64>,
    v1_db: Vec<f64>,
    v2_db: Vec<f64>,
}

fn eval(mut args: EvalArgs, provenance: bool) -> Result<()> {
    let file: EvalArgs = load_config(args.config.as_deref())?;
    args.model.overlay(file.model);
    if args.at_mhz.is_empty() {
        args.at_mhz = file.at_mhz;
    }
    overlay!(args, file; f_min_mhz, f_max_mhz, points);
    args.output.overlay(file.output);

    let model = args.model.model()?;
    let f_hz: Vec<f64> = if args.at_mhz.is_empty() {
        let lo = args.f_min_mhz.unwrap_or(0.0);
        let hi = args.f_max_mhz.unwrap_or(500.0);
        let n = args.points.unwrap_or(501);
        if !(lo >= 0.0 && hi > lo) {
            return Err(CliError::invalid(
                "f-max-mhz",
                "need 0 <= f-min-mhz < f-max-mhz",
            ));
        }
        if n < 2 {
            return Err(CliError::invalid("points", "need at least 2"));
        }
        (0..n)
            .map(|i| MHZ * (lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect()
    } else {
        args.at_mhz.iter().map(|f| f * MHZ).collect()
    };
    if let Some(bad) = f_hz.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
        return Err(CliError::invalid(
            "at-mhz",
            format!("frequency {bad} Hz is not >= 0"),
        ));
    }
    let (v1_db, v2_db) = f_hz
        .iter()
        .map(|&f| {
            let (a, b) = model.variances(f);
            (linear_to_db(a), linear_to_db(b))
        })
        .unzip();
    let report = EvalReport {
        model: (&model).into(),
        f_hz,
        v1_db,
        v2_db,
    };
    if report.f_hz.len() <= 10 {
        for ((f, a), b) in report.f_hz.iter().zip(&report.v1_db).zip(&report.v2_db) {
            println!("{:.3} MHz: v1 {a:+.3} dB, v2 {b:+.3} dB", f / MHZ);
        }
    }
    let sink = args.output.sink("spectrum", provenance);
    let path = match sink.format {
        Format::Json => sink.write_json("", &report)?,
        Format::Csv => {
            let mut t = Table::new(&["f_hz", "v1_db", "v2_db"]);
            model_meta(&mut t, &model);
            for i in 0..report.f_hz.len() {
                t.push(vec![
                    report.f_hz[i].into(),
                    report.v1_db[i].into(),
                    report.v2_db[i].into(),
                ]);
            }
            sink.write_csv("", &t)?
        }
    };
    println!("wrote {}", path.display());
    Ok(())
}

/// Trace selection for `fit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Traces {
    /// Squeezed trace only.
    V1,
    /// Anti-squeezed trace only.
    V2,
    Joint,
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct FitArgs {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// CSV with columns f_hz, v1_db, v2_db.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub traces: Option<Traces>,
    /// Resolution bandwidth of the measurement, MHz.
    #[arg(long)]
    pub rbw_mhz: Option<f64>,
    /// Starting point; the preset is used when nothing is given.
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct FitOutput {
    model: ModelReport,
    initial: ModelReport,
    residual: f64,
    initial_residual: f64,
    iterations: usize,
    status: &'static str,
    condition_number: f64,
    ill_conditioned: bool,
    bandwidth_hz: Option<f64>,
}

fn status_name(s: FitStatus) -> &'static str {
    match s {
        FitStatus::Converged => "converged",
        FitStatus::IterationLimit => "iteration-limit",
        FitStatus::NoImprovement => "no-improvement",
    }
}

fn fit(mut args: FitArgs, provenance: bool) -> Result<()> {
    let file: FitArgs = load_config(args.config.as_deref())?;
    overlay!(args, file; data, traces, rbw_mhz);
    args.model.overlay(file.model);
    args.output.overlay(file.output);

    let data_path = require(args.data.clone(), "data")?;
    let table = read_csv(&data_path)?;
    let f = table.column("f_hz")?;
    let to_linear = |db: Vec<f64>, field: &str| {
        db.into_iter()
            .map(|v| db_to_linear(v).field(field))
            .collect::<Result<Vec<_>>>()
    };
    let v1 = to_linear(table.column("v1_db")?, "v1_db")?;
    let v2 = to_linear(table.column("v2_db")?, "v2_db")?;
    let rbw = args.rbw_mhz.unwrap_or(1.0) * MHZ;
    let data = SpectrumData::new(f, v1, v2, rbw).field("data")?;

    let mut init_args = args.model.clone();
    if init_args.pump_ratio.is_none() || init_args.eta_gamma.is_none() || init_args.kappa.is_none()
    {
        init_args.preset = init_args.preset.or(Some(Preset::Paper));
    }
    let init = init_args.model()?;
    let traces = match args.traces.unwrap_or(Traces::Joint) {
        Traces::V1 => FitTraces::Squeezed,
        Traces::V2 => FitTraces::AntiSqueezed,
        Traces::Joint => FitTraces::Joint,
    };
    let report = fit_spectrum(&data, &init, traces).field("data")?;
    let out = FitOutput {
        model: (&report.model).into(),
        initial: (&init).into(),
        residual: report.residual,
        initial_residual: report.initial_residual,
        iterations: report.iterations,
        status: status_name(report.status),
        condition_number: report.condition_number,
        ill_conditioned: report.ill_conditioned(),
        bandwidth_hz: squeezing_bandwidth(&report.model).ok(),
    };
    println!(
        "pump_ratio {:.6}, eta_gamma {:.6}, kappa {:.6e} /s; residual {:.4e} dB^2 ({}, {} iterations)",
        out.model.pump_ratio, out.model.eta_gamma, out.model.kappa, out.residual, out.status, out.iterations
    );
    if out.ill_conditioned {
        println!(
            "warning: ill-conditioned fit (condition number {:.3e}); some parameters are not constrained by these traces",
            out.condition_number
        );
    }

    let sink = args.output.sink("fit", provenance);
    let path = match sink.format {
        Format::Json => sink.write_json("", &out)?,
        Format::Csv => {
            let mut t = Table::new(&["f_hz", "v1_db", "v2_db", "v1_db_model", "v2_db_model"]);
            model_meta(&mut t, &report.model);
            t.meta_float("residual", out.residual)
                .meta_float("initial_residual", out.initial_residual)
                .meta("iterations", out.iterations)
                .meta("status", out.status)
                .meta_float("condition_number", out.condition_number)
                .meta("ill_conditioned", out.ill_conditioned);
            for i in 0..data.len() {
                let (m1, m2) = report.model.variances(data.frequencies()[i]);
                t.push(vec![
                    data.frequencies()[i].into(),
                    linear_to_db(data.v1_obs()[i]).into(),
                    linear_to_db(data.v2_obs()[i]).into(),
                    linear_to_db(m1).into(),
                    linear_to_db(m2).into(),
                ]);
            }
            sink.write_csv("", &t)?
        }
    };
    println!("wrote {}", path.display());
    if report.status == FitStatus::NoImprovement {
        return Err(CliError::Convergence(
            "fit made no progress from the initial parameters".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct BandwidthArgs {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct BandwidthReport {
    model: ModelReport,
    bandwidth_hz: f64,
    zero_frequency_v1_db: f64,
    half_point_v1_db: f64,
}

fn bandwidth(mut args: BandwidthArgs, provenance: bool) -> Result<()> {
    let file: BandwidthArgs = load_config(args.config.as_deref())?;
    args.model.overlay(file.model);
    args.output.overlay(file.output);
    let model = args.model.model()?;
    let report = BandwidthReport {
        model: (&model).into(),
        bandwidth_hz: squeezing_bandwidth(&model).field("model")?,
        zero_frequency_v1_db: linear_to_db(model.variances(0.0).0),
        half_point_v1_db: linear_to_db(half_point_variance(&model)),
    };
    println!(
        "bandwidth {:.3} MHz (v1 {:+.3} dB at 0 Hz, {:+.3} dB at the half point)",
        report.bandwidth_hz / MHZ,
        report.zero_frequency_v1_db,
        report.half_point_v1_db
    );
    let sink = args.output.sink("bandwidth", provenance);
    let path = match sink.format {
        Format::Json => sink.write_json("", &report)?,
        Format::Csv => {
            let mut t = Table::new(&["quantity", "value"]);
            model_meta(&mut t, &model);
            t.push(vec!["bandwidth_hz".into(), report.bandwidth_hz.into()]);
            t.push(vec![
                "zero_frequency_v1_db".into(),
                report.zero_frequency_v1_db.into(),
            ]);
            t.push(vec![
                "half_point_v1_db".into(),
                report.half_point_v1_db.into(),
            ]);
            sink.write_csv("", &t)?
        }
    };
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct RateArgs {
    /// JSON file with default values for these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Half free spectral range, GHz.
    #[arg(long)]
    pub half_fsr_ghz: Option<f64>,
    /// Frequency bin width, kHz.
    #[arg(long)]
    pub bin_khz: Option<f64>,
    /// Fock truncation for bins holding five or more photons.
    #[arg(long)]
    pub truncation: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct RateReport {
    model: ModelReport,
    half_fsr_hz: f64,
    bin_width_hz: f64,
    bins: usize,
    rate: f64,
    power_w: f64,
    conditional_mean: Option<f64>,
    max_trace_deficit: f64,
    probabilities: Vec<f64>,
}

fn rate(mut args: RateArgs, provenance: bool) -> Result<()> {
    let file: RateArgs = load_config(args.config.as_deref())?;
    args.model.overlay(file.model);
    overlay!(args, file; half_fsr_ghz, bin_khz, truncation);
    args.output.overlay(file.output);
    let model = args.model.model()?;
    let half_fsr = args.half_fsr_ghz.map_or(presets::HALF_FSR, |g| g * 1e9);
    let bin_width = args.bin_khz.map_or(presets::BIN_WIDTH, |k| k * 1e3);
    let truncation = args.truncation.unwrap_or(DEFAULT_TRUNCATION);
    let r = spectral_photon_rate(&model, half_fsr, bin_width, truncation).field("bins")?;
    let report = RateReport {
        model: (&model).into(),
        half_fsr_hz: half_fsr,
        bin_width_hz: bin_width,
        bins: r.bins,
        rate: r.rate,
        power_w: r.power,
        conditional_mean: r.conditional_mean,
        max_trace_deficit: r.max_trace_deficit,
        probabilities: r.weighted_distribution.probabilities().to_vec(),
    };
    print!(
        "{} bins: rate {:.4e} /s, power {:.3} pW",
        report.bins,
        report.rate,
        report.power_w * 1e12
    );
    match report.conditional_mean {
        Some(c) => println!(", <n> given a click {c:.4}"),
        None => println!(", no photons"),
    }
    let sink = args.output.sink("rate", provenance);
    let path = match sink.format {
        Format::Json => sink.write_json("", &report)?,
        Format::Csv => {
            let mut t = Table::new(&["n", "probability"]);
            model_meta(&mut t, &model);
            t.meta_float("half_fsr_hz", half_fsr)
                .meta_float("bin_width_hz", bin_width)
                .meta("bins", report.bins)
                .meta_float("rate", report.rate)
                .meta_float("power_w", report.power_w)
                .meta(
                    "conditional_mean",
                    report
                        .conditional_mean
                        .map_or("none".to_owned(), crate::format::float),
                )
                .meta_float("max_trace_deficit", report.max_trace_deficit);
            for (n, &p) in report.probabilities.iter().enumerate() {
                t.push(vec![n.into(), p.into()]);
            }
            sink.write_csv("", &t)?
        }
    };
    println!("wrote {}", path.display());
    Ok(())
}

pub fn run(cmd: SpectrumCommand, provenance: bool) -> Result<()> {
    match cmd {
        SpectrumCommand::Eval(a) => eval(a, provenance),
        SpectrumCommand::Fit(a) => fit(a, provenance),
        SpectrumCommand::Bandwidth(a) => bandwidth(a, provenance),
        SpectrumCommand::Rate(a) => rate(a, provenance),
    }
}
