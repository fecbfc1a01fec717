//! Quadrature-variance description of zero-mean single-mode Gaussian states,
//! the vacuum-admixture loss model and the figures of merit derived from the
//! two variances.

use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Relative slack allowed below the uncertainty bound before a state is
/// rejected. Products inside the slack are clamped onto the bound.
pub const UNCERTAINTY_TOLERANCE: f64 = 1e-12;

/// Normalization of quadrature variances, named by the vacuum variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarianceConvention {
    /// Vacuum variance 1/4.
    Quarter,
    /// Vacuum variance 1/2.
    Half,
    /// Vacuum variance 1; variances are then ratios to vacuum noise.
    Unity,
}

impl VarianceConvention {
    /// Variance of the vacuum state in this convention.
    pub const fn vacuum_variance(self) -> f64 {
        match self {
            VarianceConvention::Quarter => 0.25,
            VarianceConvention::Half => 0.5,
            VarianceConvention::Unity => 1.0,
        }
    }

    /// Lower-case name.
    pub const fn name(self) -> &'static str {
        match self {
            VarianceConvention::Quarter => "quarter",
            VarianceConvention::Half => "half",
            VarianceConvention::Unity => "unity",
        }
    }

    /// Re-expresses a variance given in `self` in the `target` convention.
    ///
    /// All ratios between conventions are powers of two, so the conversion is
    /// exact.
    pub fn convert(self, variance: f64, target: VarianceConvention) -> f64 {
        variance * (target.vacuum_variance() / self.vacuum_variance())
    }
}

impl fmt::Display for VarianceConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Zero-mean single-mode Gaussian state given by its two principal
/// quadrature variances.
///
/// `v1` belongs to the squeezed quadrature `X1` and `v2` to the anti-squeezed
/// quadrature `X2`; the ordering is not enforced so that thermal and vacuum
/// states fit the same type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    v1: f64,
    v2: f64,
    convention: VarianceConvention,
}

impl GaussianState {
    /// Validates positivity and the uncertainty bound `v1 * v2 >= vac^2`.
    ///
    /// Products short of the bound by a relative [`UNCERTAINTY_TOLERANCE`] or
    /// less are clamped onto it by adjusting `v2`.
    pub fn new(v1: f64, v2: f64, convention: VarianceConvention) -> Result<Self> {
        if !v1.is_finite() {
            return Err(Error::NonFinite("v1"));
        }
        if !v2.is_finite() {
            return Err(Error::NonFinite("v2"));
        }
        if v1 <= 0.0 {
            return Err(Error::NonPositive {
                name: "v1",
                value: v1,
            });
        }
        if v2 <= 0.0 {
            return Err(Error::NonPositive {
                name: "v2",
                value: v2,
            });
        }
        let vac = convention.vacuum_variance();
        let bound = vac * vac;
        let product = v1 * v2;
        if product < bound * (1.0 - UNCERTAINTY_TOLERANCE) {
            return Err(Error::BelowUncertaintyBound { product, bound });
        }
        let v2 = if product < bound { bound / v1 } else { v2 };
        Ok(Self { v1, v2, convention })
    }

    /// Vacuum-normalized state from variances in dB relative to vacuum noise.
    pub fn from_db(v1_db: f64, v2_db: f64) -> Result<Self> {
        Self::new(
            db_to_linear(v1_db)?,
            db_to_linear(v2_db)?,
            VarianceConvention::Unity,
        )
    }

    /// Vacuum state in the given convention.
    pub fn vacuum(convention: VarianceConvention) -> Self {
        let vac = convention.vacuum_variance();
        Self {
            v1: vac,
            v2: vac,
            convention,
        }
    }

    /// Pure (minimum-uncertainty) squeezed vacuum with vacuum-normalized
    /// squeezed variance `v1`.
    pub fn pure(v1: f64) -> Result<Self> {
        Self::new(v1, 1.0 / v1, VarianceConvention::Unity)
    }

    /// Squeezed-quadrature variance in [`Self::convention`].
    pub fn v1(&self) -> f64 {
        self.v1
    }

    /// Anti-squeezed-quadrature variance in [`Self::convention`].
    pub fn v2(&self) -> f64 {
        self.v2
    }

    /// Convention the variances are expressed in.
    pub fn convention(&self) -> VarianceConvention {
        self.convention
    }

    /// Same state expressed in another convention.
    pub fn to_convention(&self, target: VarianceConvention) -> Self {
        Self {
            v1: self.convention.convert(self.v1, target),
            v2: self.convention.convert(self.v2, target),
            convention: target,
        }
    }

    /// Vacuum-normalized `(v1, v2)`.
    pub fn unity_variances(&self) -> (f64, f64) {
        let s = self.to_convention(VarianceConvention::Unity);
        (s.v1, s.v2)
    }

    /// Vacuum-normalized variances in dB.
    pub fn db(&self) -> (f64, f64) {
        let (v1, v2) = self.unity_variances();
        (linear_to_db(v1), linear_to_db(v2))
    }

    /// Variance of the rotated quadrature `cos(theta) X1 + sin(theta) X2`.
    pub fn quadrature_variance(&self, theta: f64) -> f64 {
        let c = libm::cos(theta);
        let s = libm::sin(theta);
        c * c * self.v1 + s * s * self.v2
    }

    fn require_unity(&self) -> Result<()> {
        if self.convention != VarianceConvention::Unity {
            return Err(Error::ConventionMismatch {
                expected: VarianceConvention::Unity.name(),
                found: self.convention.name(),
            });
        }
        Ok(())
    }
}

/// Converts a power ratio in dB to a linear ratio.
pub fn db_to_linear(v_db: f64) -> Result<f64> {
    if !v_db.is_finite() {
        return Err(Error::NonFinite("dB value"));
    }
    Ok(libm::pow(10.0, v_db / 10.0))
}

/// Converts a positive linear power ratio to dB.
pub fn linear_to_db(v: f64) -> f64 {
    10.0 * libm::log10(v)
}

/// Combined efficiency `eta * gamma` of detection and cavity escape. The
/// complement `1 - eta * gamma` is the vacuum admixed into the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    eta_gamma: f64,
}

impl LossChannel {
    /// `eta_gamma` must lie in `(0, 1]`.
    pub fn new(eta_gamma: f64) -> Result<Self> {
        if !(eta_gamma > 0.0 && eta_gamma <= 1.0) {
            return Err(Error::Efficiency(eta_gamma));
        }
        Ok(Self { eta_gamma })
    }

    /// Channel with the given vacuum admixture `1 - eta * gamma`.
    pub fn from_vacuum_admixture(admixture: f64) -> Result<Self> {
        Self::new(1.0 - admixture)
    }

    /// Detection and escape efficiency combined.
    pub fn eta_gamma(&self) -> f64 {
        self.eta_gamma
    }

    /// Admixed vacuum fraction, `1 - eta * gamma`.
    pub fn vacuum_admixture(&self) -> f64 {
        1.0 - self.eta_gamma
    }

    fn attenuate(&self, pure: f64) -> f64 {
        self.eta_gamma * pure + (1.0 - self.eta_gamma)
    }

    fn restore(&self, measured: f64) -> f64 {
        (measured - (1.0 - self.eta_gamma)) / self.eta_gamma
    }
}

/// Mixes the state with vacuum: `V = eta_gamma * V' + (1 - eta_gamma)`.
///
/// Requires vacuum-normalized variances.
pub fn apply_loss(pure: &GaussianState, loss: LossChannel) -> Result<GaussianState> {
    pure.require_unity()?;
    Ok(GaussianState {
        v1: loss.attenuate(pure.v1),
        v2: loss.attenuate(pure.v2),
        convention: VarianceConvention::Unity,
    })
}

/// Result of [`infer_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct LossEstimate {
    /// Common loss channel shared by all pairs.
    pub loss: LossChannel,
    /// Each measured pair with the loss undone, `V' = (V - (1 - eta_gamma)) / eta_gamma`.
    /// The products are only approximately one when several pairs are fitted.
    pub inverted: Vec<(f64, f64)>,
    /// Minimum-uncertainty states keeping the ratio `V'1 / V'2` of each
    /// inverted pair.
    pub pure_states: Vec<GaussianState>,
    /// Least-squares objective `sum (ln V'1 + ln V'2)^2` at the optimum.
    pub objective: f64,
}

/// Finds the single loss channel that best explains several measured
/// squeezed/anti-squeezed pairs as degraded minimum-uncertainty states.
///
/// Minimizes `sum (ln V'1 + ln V'2)^2` over `eta_gamma` in
/// `(max(1 - V1), 1]`. Every pair must be vacuum-normalized with
/// `V1 < 1 < V2`.
pub fn infer_loss(measured: &[GaussianState]) -> Result<LossEstimate> {
    if measured.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pairs = Vec::with_capacity(measured.len());
    for (index, s) in measured.iter().enumerate() {
        s.require_unity()?;
        if !(s.v1 < 1.0 && s.v2 > 1.0) {
            return Err(Error::NoSqueezing { index, v1: s.v1 });
        }
        pairs.push((s.v1, s.v2));
    }
    let lower = pairs.iter().map(|&(v1, _)| 1.0 - v1).fold(0.0, f64::max);
    let eta_gamma = minimize_log_product(&pairs, lower);

    let loss = LossChannel::new(eta_gamma)?;
    let inverted: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(v1, v2)| (loss.restore(v1), loss.restore(v2)))
        .collect();
    let pure_states = inverted
        .iter()
        .map(|&(a, b)| GaussianState::pure(libm::sqrt(a / b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LossEstimate {
        loss,
        objective: log_product_objective(&pairs, eta_gamma),
        inverted,
        pure_states,
    })
}

fn log_residual(v1: f64, v2: f64, eta_gamma: f64) -> f64 {
    let admix = 1.0 - eta_gamma;
    libm::log(v1 - admix) + libm::log(v2 - admix) - 2.0 * libm::log(eta_gamma)
}

fn log_product_objective(pairs: &[(f64, f64)], eta_gamma: f64) -> f64 {
    pairs
        .iter()
        .map(|&(v1, v2)| {
            let r = log_residual(v1, v2, eta_gamma);
            r * r
        })
        .sum()
}

/// Half the derivative of the objective with respect to `eta_gamma`.
fn log_product_slope(pairs: &[(f64, f64)], eta_gamma: f64) -> f64 {
    let admix = 1.0 - eta_gamma;
    pairs
        .iter()
        .map(|&(v1, v2)| {
            let r = log_residual(v1, v2, eta_gamma);
            let dr = 1.0 / (v1 - admix) + 1.0 / (v2 - admix) - 2.0 / eta_gamma;
            r * dr
        })
        .sum()
}

/// Coarse scan of the objective on `(lower, 1]`, then bisection on the sign
/// of the slope inside the bracket around the best scan point.
fn minimize_log_product(pairs: &[(f64, f64)], lower: f64) -> f64 {
    const SCAN: usize = 2048;
    let width = 1.0 - lower;
    // Points cluster towards `lower`, where the objective diverges.
    let at = |i: usize| lower + width * libm::pow(i as f64 / SCAN as f64, 2.0);
    let mut best = SCAN;
    let mut best_value = log_product_objective(pairs, 1.0);
    for i in 1..SCAN {
        let value = log_product_objective(pairs, at(i));
        if value < best_value {
            best = i;
            best_value = value;
        }
    }
    if best == SCAN && log_product_slope(pairs, 1.0) <= 0.0 {
        return 1.0;
    }
    let mut lo = at(best - 1).max(lower + f64::EPSILON * width);
    let mut hi = at((best + 1).min(SCAN));
    if log_product_slope(pairs, hi) <= 0.0 {
        return hi;
    }
    if log_product_slope(pairs, lo) >= 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_product_slope(pairs, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian purity `tr(rho^2) = vac / sqrt(v1 * v2)`.
pub fn purity(state: &GaussianState) -> f64 {
    let vac = state.convention.vacuum_variance();
    (vac / libm::sqrt(state.v1 * state.v2)).min(1.0)
}

/// Mean photon number `(V1 + V2) / 4 - 1/2` for vacuum-normalized variances.
pub fn mean_photon_number(state: &GaussianState) -> f64 {
    let (v1, v2) = state.unity_variances();
    ((v1 + v2) / 4.0 - 0.5).max(0.0)
}
