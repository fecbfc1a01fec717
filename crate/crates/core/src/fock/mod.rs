//! Fock-basis density matrix of a lossy squeezed vacuum state.
//!
//! Entries follow the closed-form sum over the coefficients
//!
//! ```text
//! rho[m][n] = sqrt(m! n! / (Vx Vp)) * sum_a (-T)^((m-n)/2 + 2a) U^(n-2a)
//!                                        / (a! (n-2a)! (a + (m-n)/2)!)
//! ```
//!
//! for `m >= n` and `m - n` even, with `Vx = v1 + 1/2`, `Vp = v2 + 1/2` built
//! from variances in the vacuum-1/2 convention, `U = 1 - 1/(2 Vx) - 1/(2 Vp)`
//! and `T = 1/(4 Vx) - 1/(4 Vp)`. Each term is evaluated in log space from
//! log-gamma factorials so photon numbers up to 170 neither overflow nor
//! lose the small terms.
//!
//! [`oracle_density_matrix`] builds the same matrix by brute force from a
//! squeezed thermal state and is kept independent of the closed form.

mod oracle;

use alloc::vec;
use alloc::vec::Vec;

pub use oracle::{oracle_density_matrix, OracleMatrix};

use crate::math::{ln_factorials, SignedLogSum};
use crate::state::UNCERTAINTY_TOLERANCE;
use crate::{Error, GaussianState, Result, VarianceConvention};

/// Truncation used when nothing else is requested; enough for every entry
/// up to `n = 10` of a 16 dB anti-squeezed state to settle.
pub const DEFAULT_TRUNCATION: usize = 170;

/// Trace deficit above which a matrix is flagged as under-truncated.
pub const TRUNCATION_WARNING_DEFICIT: f64 = 0.01;

/// Real symmetric density matrix on photon numbers `0..=truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<f64>,
    trace_deficit: f64,
    source_state: GaussianState,
}

impl DensityMatrix {
    fn from_entries(dim: usize, entries: Vec<f64>, source_state: GaussianState) -> Self {
        let trace: f64 = (0..dim).map(|i| entries[i * dim + i]).sum();
        Self {
            dim,
            entries,
            trace_deficit: 1.0 - trace,
            source_state,
        }
    }

    /// Number of rows, `truncation + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest photon number represented.
    pub fn truncation(&self) -> usize {
        self.dim - 1
    }

    /// Entry `rho[m][n]`.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[m * self.dim + n]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `1 - tr(rho)`: weight lost above the truncation.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// True when the truncation discards more than
    /// [`TRUNCATION_WARNING_DEFICIT`] of the trace.
    pub fn truncation_warning(&self) -> bool {
        self.trace_deficit > TRUNCATION_WARNING_DEFICIT
    }

    /// State the matrix was computed from.
    pub fn source_state(&self) -> &GaussianState {
        &self.source_state
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Diagonal entries, i.e. the photon-number probabilities.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `tr(rho^2)` of the truncated matrix.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    /// `sum n rho[n][n]` of the truncated matrix.
    pub fn mean_photon_number(&self) -> f64 {
        (0..self.dim).map(|i| i as f64 * self.get(i, i)).sum()
    }

    /// Upper-left block on photon numbers `0..=truncation`. The trace deficit
    /// is recomputed for the smaller block.
    pub fn truncated(&self, truncation: usize) -> Self {
        let dim = (truncation + 1).min(self.dim);
        let mut entries = Vec::with_capacity(dim * dim);
        for m in 0..dim {
            entries.extend_from_slice(&self.entries[m * self.dim..m * self.dim + dim]);
        }
        Self::from_entries(dim, entries, self.source_state)
    }

    /// Matrix divided by its trace, so the truncated block has unit trace.
    pub fn renormalized(&self) -> Self {
        let trace = self.trace();
        let entries = self.entries.iter().map(|x| x / trace).collect();
        Self::from_entries(self.dim, entries, self.source_state)
    }

    /// `(m, n, value)` for every entry that is not exactly zero, row-major.
    pub fn non_zero(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(k, v)| (k / self.dim, k % self.dim, *v))
    }
}

/// Coefficients of the closed form, in log space.
struct FockCoefficients {
    ln_prefactor: f64,
    ln_t: f64,
    ln_u: f64,
}

impl FockCoefficients {
    fn new(state: &GaussianState) -> Self {
        let half = state.to_convention(VarianceConvention::Half);
        // T is taken positive: the squeezed axis goes first.
        let (vx, vp) = if half.v1() <= half.v2() {
            (half.v1(), half.v2())
        } else {
            (half.v2(), half.v1())
        };
        let vx_t = vx + 0.5;
        let vp_t = vp + 0.5;
        let t = 1.0 / (4.0 * vx_t) - 1.0 / (4.0 * vp_t);
        // 1 - 1/(2 Vx) - 1/(2 Vp) == (4 vx vp - 1) / (4 Vx Vp); minimum-uncertainty
        // states then give U = 0 without cancellation.
        let excess = 4.0 * vx * vp - 1.0;
        let u = if excess.abs() <= UNCERTAINTY_TOLERANCE {
            0.0
        } else {
            excess / (4.0 * vx_t * vp_t)
        };
        Self {
            ln_prefactor: -0.5 * libm::log(vx_t * vp_t),
            ln_t: ln_or_neg_inf(t),
            ln_u: ln_or_neg_inf(u),
        }
    }

    /// `rho[m][n]`; zero when `m - n` is odd.
    ///
    /// The sum runs over `a` from `max(0, (n - m)/2)` to `n/2`, the range on
    /// which every factorial argument is non-negative, so both index orders
    /// are evaluated directly.
    fn element(&self, m: usize, n: usize, ln_fact: &[f64], acc: &mut SignedLogSum) -> f64 {
        if (m + n) % 2 == 1 {
            return 0.0;
        }
        let d = (m as isize - n as isize) / 2;
        let first = (-d).max(0) as usize;
        let ln_outer = 0.5 * (ln_fact[m] + ln_fact[n]) + self.ln_prefactor;
        acc.clear();
        for a in first..=n / 2 {
            let t_power = (d + 2 * a as isize) as usize;
            let u_power = n - 2 * a;
            let ln_term = ln_outer + scaled(t_power, self.ln_t) + scaled(u_power, self.ln_u)
                - ln_fact[a]
                - ln_fact[u_power]
                - ln_fact[(a as isize + d) as usize];
            // the sign comes from (-T)^(d + 2a)
            acc.push(t_power % 2 == 1, ln_term);
        }
        acc.value()
    }
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        libm::log(x)
    } else {
        f64::NEG_INFINITY
    }
}

/// `k * ln_x` with the convention `0 * ln(0) = 0`.
fn scaled(k: usize, ln_x: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * ln_x
    }
}

/// Density matrix of `state` on photon numbers `0..=truncation`.
///
/// Only the lower triangle is evaluated; the upper triangle is a copy, and
/// entries with `m + n` odd are never computed.
pub fn density_matrix(state: &GaussianState, truncation: usize) -> DensityMatrix {
    let dim = truncation + 1;
    let coeffs = FockCoefficients::new(state);
    let ln_fact = ln_factorials(truncation);
    let mut acc = SignedLogSum::new();
    let mut entries = vec![0.0; dim * dim];
    for m in 0..dim {
        for n in (m % 2..=m).step_by(2) {
            let value = coeffs.element(m, n, &ln_fact, &mut acc);
            entries[m * dim + n] = value;
            entries[n * dim + m] = value;
        }
    }
    DensityMatrix::from_entries(dim, entries, *state)
}

/// Photon-number probabilities on `0..=truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probabilities: Vec<f64>,
    source_state: Option<GaussianState>,
}

impl PhotonDistribution {
    /// Distribution from raw probabilities; they must be non-negative and sum
    /// to at most one (within 1e-9).
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidArgument("empty photon distribution"));
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidArgument(
                "probabilities must be finite and non-negative",
            ));
        }
        if probabilities.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument("probabilities sum above one"));
        }
        Ok(Self {
            probabilities,
            source_state: None,
        })
    }

    /// Probabilities `P(0..=N)`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `P(n)`, zero beyond the truncation.
    pub fn get(&self, n: usize) -> f64 {
        self.probabilities.get(n).copied().unwrap_or(0.0)
    }

    /// Number of photon numbers represented.
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    /// Always false; a distribution holds at least `P(0)`.
    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// State the distribution came from, when it came from a single one.
    pub fn source_state(&self) -> Option<&GaussianState> {
        self.source_state.as_ref()
    }

    /// Total probability captured by the truncation.
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// `sum n P(n)`.
    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

/// Diagonal of the density matrix.
pub fn photon_distribution(dm: &DensityMatrix) -> PhotonDistribution {
    PhotonDistribution {
        probabilities: dm.diagonal().iter().map(|p| p.max(0.0)).collect(),
        source_state: Some(dm.source_state),
    }
}

/// Photon-number distribution of `state` without building the off-diagonal
/// entries. Agrees with `photon_distribution(&density_matrix(..))` exactly.
pub fn photon_distribution_of(state: &GaussianState, truncation: usize) -> PhotonDistribution {
    let coeffs = FockCoefficients::new(state);
    let ln_fact = ln_factorials(truncation);
    let mut acc = SignedLogSum::new();
    let probabilities = (0..=truncation)
        .map(|n| coeffs.element(n, n, &ln_fact, &mut acc).max(0.0))
        .collect();
    PhotonDistribution {
        probabilities,
        source_state: Some(*state),
    }
}

/// Odd/even contrast at each even photon number `n = 2, 4, .. <= max_n`:
/// `(P(n) - avg) / (P(n) + avg)` with `avg` the mean of `P(n - 1)` and
/// `P(n + 1)`. `None` where all three probabilities vanish.
pub fn oscillation_contrast(
    pd: &PhotonDistribution,
    max_n: usize,
) -> Result<Vec<(usize, Option<f64>)>> {
    if max_n + 1 >= pd.len() {
        return Err(Error::InvalidArgument(
            "max_n + 1 must lie inside the distribution",
        ));
    }
    Ok((2..=max_n)
        .step_by(2)
        .map(|n| {
            let even = pd.get(n);
            let odd = 0.5 * (pd.get(n - 1) + pd.get(n + 1));
            let denom = even + odd;
            let contrast = (denom > 0.0).then(|| (even - odd) / denom);
            (n, contrast)
        })
        .collect())
}

/// Mean photon number of the distribution conditioned on at least one
/// photon: `sum_{n>=1} n P(n) / sum_{n>=1} P(n)`.
pub fn conditional_mean_given_click(pd: &PhotonDistribution) -> Result<f64> {
    let tail: f64 = pd.probabilities.iter().skip(1).sum();
    if tail <= 0.0 {
        return Err(Error::NoClicks);
    }
    Ok(pd.mean() / tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_db(a: f64, b: f64) -> GaussianState {
        GaussianState::from_db(a, b).unwrap()
    }

    #[test]
    fn vacuum_is_ground_state_projector() {
        for conv in [VarianceConvention::Quarter, VarianceConvention::Unity] {
            let dm = density_matrix(&GaussianState::vacuum(conv), 12);
            assert_eq!(dm.get(0, 0), 1.0);
            assert_eq!(dm.non_zero().count(), 1);
            assert_eq!(dm.trace_deficit(), 0.0);
        }
    }

    #[test]
    fn low_order_entries_of_weak_state() {
        let dm = density_matrix(&state_db(-2.84, 2.94), 10);
        assert!((dm.get(0, 0) - 0.9416).abs() < 5e-5);
        assert!((dm.get(0, 2) + 0.2137).abs() < 5e-5);
        assert!((dm.get(1, 1) - 0.0049).abs() < 5e-5);
        assert!((dm.get(2, 2) - 0.0485).abs() < 5e-5);
    }

    #[test]
    fn structure_invariants() {
        let dm = density_matrix(&state_db(-6.2, 6.7), 40);
        for m in 0..dm.dim() {
            assert!(dm.get(m, m) >= 0.0);
            for n in 0..dm.dim() {
                assert_eq!(dm.get(m, n), dm.get(n, m));
                if (m + n) % 2 == 1 {
                    assert_eq!(dm.get(m, n), 0.0);
                }
                let bound = libm::sqrt(dm.get(m, m) * dm.get(n, n)) + 1e-9;
                assert!(dm.get(m, n).abs() <= bound);
            }
        }
        assert!(dm.trace() <= 1.0 + 1e-9);
    }

    #[test]
    fn formula_is_symmetric_under_index_swap() {
        let coeffs = FockCoefficients::new(&state_db(-11.5, 16.0));
        let ln_fact = ln_factorials(60);
        let mut acc = SignedLogSum::new();
        for m in 0..=60 {
            for n in (m % 2..=60).step_by(2) {
                let a = coeffs.element(m, n, &ln_fact, &mut acc);
                let b = coeffs.element(n, m, &ln_fact, &mut acc);
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                    "{m} {n}: {a} {b}"
                );
            }
        }
    }

    #[test]
    fn anti_squeezed_first_ordering_gives_same_matrix() {
        let a = density_matrix(&state_db(-6.2, 6.7), 12);
        let b = density_matrix(&state_db(6.7, -6.2), 12);
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn pure_states_have_no_odd_photons() {
        let dm = density_matrix(&GaussianState::pure(0.05).unwrap(), 60);
        for k in 0..30 {
            assert_eq!(dm.get(2 * k + 1, 2 * k + 1), 0.0);
        }
        let lossy = density_matrix(&state_db(-11.5, 16.0), 20);
        assert!(lossy.get(1, 1) > 0.0 && lossy.get(9, 9) > 0.0);
    }

    #[test]
    fn truncation_flag() {
        let dm = density_matrix(&state_db(-11.5, 16.0), 10);
        assert!(dm.truncation_warning());
        let dm = density_matrix(&state_db(-11.5, 16.0), 170);
        assert!(!dm.truncation_warning());
        let small = dm.truncated(10);
        assert_eq!(small.dim(), 11);
        assert_eq!(small.get(10, 10), dm.get(10, 10));
        assert!((small.renormalized().trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_path_matches_full_matrix() {
        let s = state_db(-11.5, 16.0);
        let full = photon_distribution(&density_matrix(&s, 50));
        let diag = photon_distribution_of(&s, 50);
        assert_eq!(full, diag);
    }

    #[test]
    fn photon_distribution_facts() {
        let weak = photon_distribution(&density_matrix(&state_db(-2.84, 2.94), 10));
        assert!((weak.get(1) - 0.0049).abs() < 1e-4);
        let strong = photon_distribution(&density_matrix(&state_db(-11.5, 16.0), 170));
        assert!(strong.get(10) > strong.get(9));
        let vac = photon_distribution_of(&GaussianState::vacuum(VarianceConvention::Unity), 5);
        assert_eq!(vac.probabilities(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn contrast_examples() {
        let pure = photon_distribution_of(&GaussianState::pure(0.1).unwrap(), 30);
        for (_, c) in oscillation_contrast(&pure, 20).unwrap() {
            assert_eq!(c, Some(1.0));
        }
        let uniform = PhotonDistribution::new(vec![0.05; 20]).unwrap();
        for (_, c) in oscillation_contrast(&uniform, 18).unwrap() {
            assert_eq!(c, Some(0.0));
        }
        let strong = photon_distribution_of(&state_db(-11.5, 16.0), 170);
        let c10 = oscillation_contrast(&strong, 10).unwrap();
        assert_eq!(c10.last().unwrap().0, 10);
        let p = |n| strong.get(n);
        let expected = (p(10) - 0.5 * (p(9) + p(11))) / (p(10) + 0.5 * (p(9) + p(11)));
        assert_eq!(c10.last().unwrap().1, Some(expected));
        assert!(expected > 0.0);

        let zeros = PhotonDistribution::new(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(oscillation_contrast(&zeros, 2).unwrap(), vec![(2, None)]);
        assert!(oscillation_contrast(&zeros, 4).is_err());
    }

    #[test]
    fn conditional_mean_examples() {
        let pair = PhotonDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(conditional_mean_given_click(&pair).unwrap(), 2.0);
        // weak pure squeezing: almost every click comes from a single pair
        let weak = photon_distribution_of(&GaussianState::pure(0.999).unwrap(), 20);
        assert!((conditional_mean_given_click(&weak).unwrap() - 2.0).abs() < 1e-3);
        let vac = PhotonDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(conditional_mean_given_click(&vac), Err(Error::NoClicks));
    }

    #[test]
    fn distribution_validation() {
        assert!(PhotonDistribution::new(vec![]).is_err());
        assert!(PhotonDistribution::new(vec![0.6, 0.6]).is_err());
        assert!(PhotonDistribution::new(vec![1.1, -0.1]).is_err());
    }
}
