//! Least-squares fit of the OPO spectrum to measured variance traces.
//!
//! Residuals are `10 log10(model / observed)` so the squeezed and
//! anti-squeezed traces carry comparable weight. The three parameters are
//! mapped to unbounded coordinates (scaled logit for the pump ratio, logit
//! for the efficiency, log for the decay rate) and minimized with a damped
//! Gauss-Newton (Levenberg-Marquardt) iteration on a central-difference
//! Jacobian.

use alloc::vec::Vec;

use super::{SpectrumModel, MAX_PUMP_RATIO};
use crate::math::symmetric_eigenvalues3;
use crate::{Error, Result};

/// Condition number of `J^T J` above which the fit is reported as
/// ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e8;
const MAX_ITERATIONS: usize = 500;
const MIN_POINTS: usize = 3;

/// Which measured traces enter the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitTraces {
    /// Squeezed variance only.
    Squeezed,
    /// Anti-squeezed variance only.
    AntiSqueezed,
    /// Both traces.
    Joint,
}

impl FitTraces {
    fn squeezed(self) -> bool {
        matches!(self, FitTraces::Squeezed | FitTraces::Joint)
    }

    fn anti_squeezed(self) -> bool {
        matches!(self, FitTraces::AntiSqueezed | FitTraces::Joint)
    }
}

/// Measured squeezing spectrum, vacuum-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumData {
    frequencies: Vec<f64>,
    v1_obs: Vec<f64>,
    v2_obs: Vec<f64>,
    resolution_bandwidth: f64,
}

impl SpectrumData {
    /// Frequencies in Hz must be positive and strictly increasing; variances
    /// positive.
    pub fn new(
        frequencies: Vec<f64>,
        v1_obs: Vec<f64>,
        v2_obs: Vec<f64>,
        resolution_bandwidth: f64,
    ) -> Result<Self> {
        if v1_obs.len() != frequencies.len() {
            return Err(Error::LengthMismatch(frequencies.len(), v1_obs.len()));
        }
        if v2_obs.len() != frequencies.len() {
            return Err(Error::LengthMismatch(frequencies.len(), v2_obs.len()));
        }
        for (i, f) in frequencies.iter().enumerate() {
            let ok = f.is_finite() && *f > 0.0 && (i == 0 || *f > frequencies[i - 1]);
            if !ok {
                return Err(Error::NonMonotone(i));
            }
        }
        for v in v1_obs.iter().chain(&v2_obs) {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::NonPositive {
                    name: "observed variance",
                    value: *v,
                });
            }
        }
        if !(resolution_bandwidth.is_finite() && resolution_bandwidth > 0.0) {
            return Err(Error::NonPositive {
                name: "resolution bandwidth",
                value: resolution_bandwidth,
            });
        }
        Ok(Self {
            frequencies,
            v1_obs,
            v2_obs,
            resolution_bandwidth,
        })
    }

    /// Noise-free data sampled from `model`.
    pub fn from_model(
        model: &SpectrumModel,
        frequencies: Vec<f64>,
        resolution_bandwidth: f64,
    ) -> Result<Self> {
        let (v1, v2) = frequencies.iter().map(|&f| model.variances(f)).unzip();
        Self::new(frequencies, v1, v2, resolution_bandwidth)
    }

    /// Fourier frequencies, Hz.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Observed squeezed variances.
    pub fn v1_obs(&self) -> &[f64] {
        &self.v1_obs
    }

    /// Observed anti-squeezed variances.
    pub fn v2_obs(&self) -> &[f64] {
        &self.v2_obs
    }

    /// Resolution bandwidth of the measurement, Hz.
    pub fn resolution_bandwidth(&self) -> f64 {
        self.resolution_bandwidth
    }

    /// Number of frequency points.
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    /// True when there are no points.
    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// How the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    /// Step or cost change fell below tolerance.
    Converged,
    /// Iteration budget exhausted after at least one improvement.
    IterationLimit,
    /// No step lowered the residual; the initial model is returned.
    NoImprovement,
}

/// Outcome of [`fit_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: SpectrumModel,
    /// Sum of squared dB residuals at `model`.
    pub residual: f64,
    /// Same sum at the initial model.
    pub initial_residual: f64,
    pub iterations: usize,
    pub status: FitStatus,
    /// Condition number of `J^T J` in the internal coordinates at the
    /// returned model; infinite when singular.
    pub condition_number: f64,
}

impl FitReport {
    /// True when some parameter combination is not constrained by the data.
    pub fn ill_conditioned(&self) -> bool {
        !(self.condition_number <= CONDITION_WARNING)
    }
}

fn logit(x: f64) -> f64 {
    libm::log(x / (1.0 - x))
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-u))
}

fn to_internal(model: &SpectrumModel) -> [f64; 3] {
    let p = (model.pump_ratio() / MAX_PUMP_RATIO).clamp(1e-9, 1.0 - 1e-9);
    let e = model.eta_gamma().clamp(1e-12, 1.0 - 1e-12);
    [logit(p), logit(e), libm::log(model.kappa())]
}

fn from_internal(x: &[f64; 3]) -> Result<SpectrumModel> {
    SpectrumModel::new(
        MAX_PUMP_RATIO * sigmoid(x[0]),
        sigmoid(x[1]),
        libm::exp(x[2]),
    )
}

struct Problem<'a> {
    data: &'a SpectrumData,
    traces: FitTraces,
}

impl Problem<'_> {
    fn residuals(&self, x: &[f64; 3], out: &mut Vec<f64>) -> Result<()> {
        let model = from_internal(x)?;
        out.clear();
        for (i, &f) in self.data.frequencies.iter().enumerate() {
            let (v1, v2) = model.variances(f);
            if self.traces.squeezed() {
                out.push(10.0 * libm::log10(v1 / self.data.v1_obs[i]));
            }
            if self.traces.anti_squeezed() {
                out.push(10.0 * libm::log10(v2 / self.data.v2_obs[i]));
            }
        }
        Ok(())
    }

    fn cost(&self, x: &[f64; 3], scratch: &mut Vec<f64>) -> f64 {
        match self.residuals(x, scratch) {
            Ok(()) => {
                let c: f64 = scratch.iter().map(|r| r * r).sum();
                if c.is_finite() {
                    c
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    }

    /// `J^T J` and `J^T r` from central differences.
    fn normal_equations(&self, x: &[f64; 3], r: &[f64]) -> Result<([[f64; 3]; 3], [f64; 3])> {
        let mut columns: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (j, column) in columns.iter_mut().enumerate() {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = *x;
            let mut xm = *x;
            xp[j] += h;
            xm[j] -= h;
            self.residuals(&xp, &mut plus)?;
            self.residuals(&xm, &mut minus)?;
            *column = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
        }
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for a in 0..3 {
            jtr[a] = columns[a].iter().zip(r).map(|(j, r)| j * r).sum();
            for b in 0..3 {
                jtj[a][b] = columns[a].iter().zip(&columns[b]).map(|(p, q)| p * q).sum();
            }
        }
        Ok((jtj, jtr))
    }
}

/// Solves the 3x3 system by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn condition_number(jtj: &[[f64; 3]; 3]) -> f64 {
    let eig = symmetric_eigenvalues3(*jtj);
    if eig[0] <= 0.0 {
        f64::INFINITY
    } else {
        eig[2] / eig[0]
    }
}

/// Fits pump ratio, efficiency and decay rate to `data` starting from
/// `init`.
///
/// The returned residual never exceeds the residual at `init`. Each selected
/// trace needs at least three points. Fitting a single trace leaves a
/// direction of parameter space unconstrained, which shows up as an
/// [`ill_conditioned`](FitReport::ill_conditioned) report.
pub fn fit_spectrum(
    data: &SpectrumData,
    init: &SpectrumModel,
    traces: FitTraces,
) -> Result<FitReport> {
    if data.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            required: MIN_POINTS,
            found: data.len(),
        });
    }
    let problem = Problem { data, traces };
    let mut x = to_internal(init);
    let mut r = Vec::new();
    problem.residuals(&x, &mut r)?;
    let initial_residual: f64 = r.iter().map(|v| v * v).sum();
    let mut cost = initial_residual;
    let mut scratch = Vec::new();
    let mut lambda = 1e-3;
    let mut improved = false;
    let mut status = FitStatus::IterationLimit;
    let mut iterations = 0;

    'outer: while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = problem.normal_equations(&x, &r)?;
        loop {
            let mut damped = jtj;
            for (k, row) in damped.iter_mut().enumerate() {
                row[k] += lambda * jtj[k][k].max(1e-12);
            }
            let step = match solve3(damped, [-jtr[0], -jtr[1], -jtr[2]]) {
                Some(step) => step,
                None => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        status = FitStatus::NoImprovement;
                        break 'outer;
                    }
                    continue;
                }
            };
            let tiny = (0..3).all(|k| step[k].abs() <= 1e-13 * (1.0 + x[k].abs()));
            if tiny {
                status = FitStatus::Converged;
                break 'outer;
            }
            let candidate = [x[0] + step[0], x[1] + step[1], x[2] + step[2]];
            let candidate_cost = problem.cost(&candidate, &mut scratch);
            if candidate_cost < cost {
                let gain = cost - candidate_cost;
                x = candidate;
                core::mem::swap(&mut r, &mut scratch);
                cost = candidate_cost;
                improved = true;
                lambda = (lambda / 3.0).max(1e-12);
                if gain <= 1e-15 * cost || cost == 0.0 {
                    status = FitStatus::Converged;
                    break 'outer;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                status = FitStatus::NoImprovement;
                break 'outer;
            }
        }
    }

    if status == FitStatus::NoImprovement && improved {
        // the damping ran away only after progress was made: a flat optimum
        status = FitStatus::Converged;
    }
    let (model, x, residual) = if improved {
        (from_internal(&x)?, x, cost)
    } else {
        (*init, to_internal(init), initial_residual)
    };
    problem.residuals(&x, &mut r)?;
    let (jtj, _) = problem.normal_equations(&x, &r)?;
    Ok(FitReport {
        model,
        residual,
        initial_residual,
        iterations,
        status,
        condition_number: condition_number(&jtj),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use alloc::vec;

    fn grid(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 5e6 + 95e6 * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn data_validation() {
        assert!(matches!(
            SpectrumData::new(vec![1.0, 1.0], vec![0.5, 0.5], vec![2.0, 2.0], 1e6),
            Err(Error::NonMonotone(1))
        ));
        assert!(SpectrumData::new(vec![1.0], vec![0.5, 0.4], vec![2.0], 1e6).is_err());
        assert!(SpectrumData::new(vec![1.0], vec![0.0], vec![2.0], 1e6).is_err());
        assert!(SpectrumData::new(vec![-1.0], vec![0.5], vec![2.0], 1e6).is_err());
    }

    #[test]
    fn too_few_points() {
        let m = presets::spectrum_model();
        let data = SpectrumData::from_model(&m, vec![1e6, 2e6], 1e6).unwrap();
        assert!(matches!(
            fit_spectrum(&data, &m, FitTraces::Joint),
            Err(Error::TooFewPoints {
                required: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn noiseless_round_trip() {
        let truth = presets::spectrum_model();
        let data = SpectrumData::from_model(&truth, grid(20), 1e6).unwrap();
        let init = SpectrumModel::new(0.4, 0.9, 0.8e9).unwrap();
        let fit = fit_spectrum(&data, &init, FitTraces::Joint).unwrap();
        assert_eq!(fit.status, FitStatus::Converged);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(fit.model.pump_ratio(), truth.pump_ratio()) < 1e-6);
        assert!(rel(fit.model.eta_gamma(), truth.eta_gamma()) < 1e-6);
        assert!(rel(fit.model.kappa(), truth.kappa()) < 1e-6);
        assert!(fit.residual <= fit.initial_residual);
        assert!(!fit.ill_conditioned());
    }

    #[test]
    fn refit_from_optimum_is_stable() {
        let truth = presets::spectrum_model();
        let data = SpectrumData::from_model(&truth, grid(20), 1e6).unwrap();
        let init = SpectrumModel::new(0.4, 0.9, 0.8e9).unwrap();
        let first = fit_spectrum(&data, &init, FitTraces::Joint).unwrap();
        let second = fit_spectrum(&data, &first.model, FitTraces::Joint).unwrap();
        assert!((first.model.pump_ratio() - second.model.pump_ratio()).abs() < 1e-9);
        assert!((first.model.eta_gamma() - second.model.eta_gamma()).abs() < 1e-9);
        assert!((first.model.kappa() - second.model.kappa()).abs() < 1e-9 * first.model.kappa());
        assert!(second.residual <= second.initial_residual);
    }

    #[test]
    fn single_trace_fits_are_flagged() {
        let truth = presets::spectrum_model();
        let data = SpectrumData::from_model(&truth, grid(20), 1e6).unwrap();
        let init = SpectrumModel::new(0.5, 0.93, 1.1e9).unwrap();
        for traces in [FitTraces::AntiSqueezed, FitTraces::Squeezed] {
            let fit = fit_spectrum(&data, &init, traces).unwrap();
            assert!(
                fit.ill_conditioned(),
                "{traces:?}: {}",
                fit.condition_number
            );
            assert!(fit.residual <= fit.initial_residual);
        }
    }

    #[test]
    fn solve3_identity() {
        let x = solve3(
            [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 1.0]],
            [2.0, 2.0, 3.0],
        )
        .unwrap();
        assert_eq!(x, [1.0, 0.5, 3.0]);
        assert!(solve3([[0.0; 3]; 3], [1.0, 1.0, 1.0]).is_none());
    }
}
