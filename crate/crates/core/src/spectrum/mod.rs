//! Squeezing spectrum of a below-threshold optical parametric oscillator.
//!
//! With pump ratio `p = P/P_th`, total efficiency `eta_gamma` and
//! `K = 2 pi f / kappa`,
//!
//! ```text
//! V1(f) = 1 - eta_gamma 4 sqrt(p) / ((1 + sqrt(p))^2 + 4 K^2)
//! V2(f) = 1 + eta_gamma 4 sqrt(p) / ((1 - sqrt(p))^2 + 4 K^2)
//! ```
//!
//! The module also derives the squeezing bandwidth and integrates the
//! photon-number statistics over spectral bins to get the down-converted
//! photon rate of one cavity mode.

mod fit;

use alloc::vec::Vec;
use core::f64::consts::PI;

pub use fit::{fit_spectrum, FitReport, FitStatus, FitTraces, SpectrumData};

use crate::fock::{self, PhotonDistribution, TRUNCATION_WARNING_DEFICIT};
use crate::{mean_photon_number, Error, GaussianState, Result, VarianceConvention};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Carrier wavelength of the squeezed field, m.
pub const CARRIER_WAVELENGTH: f64 = 1064e-9;
/// Energy of one 1064 nm photon, J.
pub const PHOTON_ENERGY: f64 = PLANCK * SPEED_OF_LIGHT / CARRIER_WAVELENGTH;

/// Largest pump ratio the fitter may reach.
pub const MAX_PUMP_RATIO: f64 = 0.999;
/// Fock truncation used for spectral bins holding fewer than
/// [`LOW_TRUNCATION_MEAN`] photons.
pub const LOW_TRUNCATION: usize = 50;
/// Mean photon number below which [`LOW_TRUNCATION`] suffices.
pub const LOW_TRUNCATION_MEAN: f64 = 5.0;

/// Cavity parameters that fix the decay rate, `kappa = (T + L) c / l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Output coupler power transmittance `T`.
    pub transmittance: f64,
    /// Round-trip loss `L` inside the cavity.
    pub round_trip_loss: f64,
    /// Round-trip optical path length `l`, m.
    pub round_trip_length: f64,
}

impl CavityGeometry {
    /// `(T + L) c / l` in rad/s.
    pub fn decay_rate(&self) -> f64 {
        (self.transmittance + self.round_trip_loss) * SPEED_OF_LIGHT / self.round_trip_length
    }

    /// Escape efficiency `T / (T + L)`.
    pub fn escape_efficiency(&self) -> f64 {
        self.transmittance / (self.transmittance + self.round_trip_loss)
    }

    fn validate(&self) -> Result<()> {
        if !(self.transmittance > 0.0 && self.transmittance <= 1.0) {
            return Err(Error::InvalidArgument("transmittance must lie in (0, 1]"));
        }
        if !(self.round_trip_loss >= 0.0 && self.round_trip_loss < 1.0) {
            return Err(Error::InvalidArgument("round-trip loss must lie in [0, 1)"));
        }
        if !(self.round_trip_length.is_finite() && self.round_trip_length > 0.0) {
            return Err(Error::NonPositive {
                name: "round-trip length",
                value: self.round_trip_length,
            });
        }
        Ok(())
    }
}

/// Parameters of the below-threshold OPO spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumModel {
    pump_ratio: f64,
    eta_gamma: f64,
    kappa: f64,
    cavity: Option<CavityGeometry>,
}

impl SpectrumModel {
    /// Model from the decay rate `kappa` (rad/s) directly.
    pub fn new(pump_ratio: f64, eta_gamma: f64, kappa: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&pump_ratio) {
            return Err(Error::PumpRatio(pump_ratio));
        }
        if !(eta_gamma > 0.0 && eta_gamma <= 1.0) {
            return Err(Error::Efficiency(eta_gamma));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::NonPositive {
                name: "kappa",
                value: kappa,
            });
        }
        Ok(Self {
            pump_ratio,
            eta_gamma,
            kappa,
            cavity: None,
        })
    }

    /// Model whose decay rate follows from the cavity geometry.
    pub fn with_cavity(pump_ratio: f64, eta_gamma: f64, cavity: CavityGeometry) -> Result<Self> {
        cavity.validate()?;
        let mut model = Self::new(pump_ratio, eta_gamma, cavity.decay_rate())?;
        model.cavity = Some(cavity);
        Ok(model)
    }

    /// Pump power over threshold power.
    pub fn pump_ratio(&self) -> f64 {
        self.pump_ratio
    }

    /// Detection times escape efficiency.
    pub fn eta_gamma(&self) -> f64 {
        self.eta_gamma
    }

    /// Cavity decay rate, rad/s.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Geometry the decay rate was derived from, if known.
    pub fn cavity(&self) -> Option<&CavityGeometry> {
        self.cavity.as_ref()
    }

    /// Same parameters with a different decay rate; drops the geometry.
    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.pump_ratio, self.eta_gamma, kappa)
    }

    /// `(V1, V2)` at Fourier frequency `f >= 0` (Hz), vacuum-normalized.
    pub fn variances(&self, f: f64) -> (f64, f64) {
        let s = libm::sqrt(self.pump_ratio);
        let k = 2.0 * PI * f / self.kappa;
        let k2 = 4.0 * k * k;
        let gain = self.eta_gamma * 4.0 * s;
        let v1 = 1.0 - gain / ((1.0 + s) * (1.0 + s) + k2);
        let v2 = 1.0 + gain / ((1.0 - s) * (1.0 - s) + k2);
        (v1, v2)
    }

    /// Gaussian state emitted in the analysis bin at frequency `f`.
    pub fn state_at(&self, f: f64) -> Result<GaussianState> {
        let (v1, v2) = self.variances(f);
        GaussianState::new(v1, v2, VarianceConvention::Unity)
    }
}

/// `(V1, V2)` of `model` at `f` Hz; `f` must be finite and non-negative.
pub fn model_variances(model: &SpectrumModel, f: f64) -> Result<(f64, f64)> {
    if !f.is_finite() {
        return Err(Error::NonFinite("frequency"));
    }
    if f < 0.0 {
        return Err(Error::InvalidArgument("frequency must be non-negative"));
    }
    Ok(model.variances(f))
}

/// Squeezed variance half way between its zero-frequency value and vacuum,
/// `V1(0) + (1 - V1(0)) / 2`.
pub fn half_point_variance(model: &SpectrumModel) -> f64 {
    let v0 = model.variances(0.0).0;
    v0 + 0.5 * (1.0 - v0)
}

/// Frequency (Hz) at which `V1` has risen half way from `V1(0)` to vacuum.
///
/// Setting `V1(f)` to the half point gives `4 K^2 = (1 + sqrt(p))^2`, so
/// `f = kappa (1 + sqrt(p)) / (4 pi)`. The closed form is checked against the
/// model and replaced by bisection if it misses.
pub fn squeezing_bandwidth(model: &SpectrumModel) -> Result<f64> {
    let target = require_squeezing(model)?;
    let f = model.kappa * (1.0 + libm::sqrt(model.pump_ratio)) / (4.0 * PI);
    if (model.variances(f).0 - target).abs() <= 1e-12 {
        Ok(f)
    } else {
        bandwidth_by_bisection(model)
    }
}

/// Bandwidth found by bisection on `V1(f)` alone.
pub fn bandwidth_by_bisection(model: &SpectrumModel) -> Result<f64> {
    let target = require_squeezing(model)?;
    let mut lo = 0.0;
    let mut hi = model.kappa;
    while model.variances(hi).0 < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if model.variances(mid).0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn require_squeezing(model: &SpectrumModel) -> Result<f64> {
    if model.pump_ratio <= 0.0 || model.variances(0.0).0 >= 1.0 {
        return Err(Error::DegenerateModel);
    }
    Ok(half_point_variance(model))
}

/// Photon statistics integrated over the spectral bins of one cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRate {
    /// Down-converted photons per second.
    pub rate: f64,
    /// Optical power of that flux at 1064 nm, W.
    pub power: f64,
    /// Bin-averaged photon-number distribution.
    pub weighted_distribution: PhotonDistribution,
    /// Mean photon number of the weighted distribution given a click;
    /// `None` when no bin holds any photons.
    pub conditional_mean: Option<f64>,
    /// Number of bins summed.
    pub bins: usize,
    /// Largest trace deficit of any single bin.
    pub max_trace_deficit: f64,
}

/// Splits `[0, half_fsr]` into bins of `bin_width` Hz centred at
/// `(i + 1/2) bin_width`, evaluates the photon-number distribution of the
/// state in every bin and averages them.
///
/// Bins with fewer than [`LOW_TRUNCATION_MEAN`] photons are truncated at
/// [`LOW_TRUNCATION`], the rest at `truncation`. The rate is
/// `sum_i <n>_i * bin_width`. All reductions run over a fixed pairwise tree so
/// the result does not depend on evaluation order.
pub fn spectral_photon_rate(
    model: &SpectrumModel,
    half_fsr: f64,
    bin_width: f64,
    truncation: usize,
) -> Result<SpectralRate> {
    if !(half_fsr.is_finite() && half_fsr > 0.0) {
        return Err(Error::NonPositive {
            name: "half FSR",
            value: half_fsr,
        });
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::NonPositive {
            name: "bin width",
            value: bin_width,
        });
    }
    let ratio = half_fsr / bin_width;
    let bins = libm::round(ratio);
    if bins < 1.0 || (ratio - bins).abs() > 1e-9 * bins {
        return Err(Error::BinMismatch {
            span: half_fsr,
            bin_width,
        });
    }
    let bins = bins as usize;
    let ctx = BinContext {
        model,
        bin_width,
        truncation,
    };
    let total = ctx.reduce(0, bins)?;

    let rate = total.mean_sum * bin_width;
    let probabilities: Vec<f64> = total
        .probabilities
        .iter()
        .map(|p| p / bins as f64)
        .collect();
    let weighted_distribution = PhotonDistribution::new(probabilities)?;
    let conditional_mean = fock::conditional_mean_given_click(&weighted_distribution).ok();
    Ok(SpectralRate {
        rate,
        power: rate * PHOTON_ENERGY,
        weighted_distribution,
        conditional_mean,
        bins,
        max_trace_deficit: total.max_deficit,
    })
}

struct BinContext<'a> {
    model: &'a SpectrumModel,
    bin_width: f64,
    truncation: usize,
}

struct BinSum {
    probabilities: Vec<f64>,
    mean_sum: f64,
    max_deficit: f64,
}

impl BinContext<'_> {
    fn reduce(&self, lo: usize, hi: usize) -> Result<BinSum> {
        if hi - lo == 1 {
            return self.leaf(lo);
        }
        let mid = lo + (hi - lo) / 2;
        let mut left = self.reduce(lo, mid)?;
        let right = self.reduce(mid, hi)?;
        for (l, r) in left.probabilities.iter_mut().zip(&right.probabilities) {
            *l += r;
        }
        left.mean_sum += right.mean_sum;
        left.max_deficit = left.max_deficit.max(right.max_deficit);
        Ok(left)
    }

    fn leaf(&self, bin: usize) -> Result<BinSum> {
        let frequency = (bin as f64 + 0.5) * self.bin_width;
        let state = self.model.state_at(frequency)?;
        let truncation = if mean_photon_number(&state) < LOW_TRUNCATION_MEAN {
            LOW_TRUNCATION.min(self.truncation)
        } else {
            self.truncation
        };
        let pd = fock::photon_distribution_of(&state, truncation);
        let deficit = 1.0 - pd.total();
        if deficit > TRUNCATION_WARNING_DEFICIT {
            return Err(Error::TruncationInsufficient {
                bin,
                frequency,
                deficit,
            });
        }
        let mut probabilities = alloc::vec![0.0; self.truncation + 1];
        probabilities[..pd.len()].copy_from_slice(pd.probabilities());
        Ok(BinSum {
            mean_sum: pd.mean(),
            probabilities,
            max_deficit: deficit,
        })
    }
}
