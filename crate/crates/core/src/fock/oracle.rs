//! Brute-force reference for [`density_matrix`](super::density_matrix).
//!
//! A lossy squeezed vacuum is a squeezed thermal state
//! `S(r) rho_th(nbar) S(r)^T` with `e^(2r) = sqrt(V2 / V1)` and
//! `2 nbar + 1 = sqrt(V1 V2)` (vacuum-normalized variances). The squeeze
//! operator `S(r) = exp((r/2)(a^2 - a^dag^2))` is built on a truncated Fock
//! workspace by applying the matrix exponential of the generator to the basis
//! vectors occupied by the thermal state. The workspace is enlarged until
//! the requested block stops changing.

use alloc::vec;
use alloc::vec::Vec;

use super::DensityMatrix;
use crate::{Error, GaussianState, Result};

/// Thermal weight allowed beyond the last propagated Fock state.
const THERMAL_TAIL: f64 = 1e-12;
/// Change in any entry between two workspace sizes accepted as converged.
const CONVERGENCE: f64 = 1e-10;
const MAX_WORKSPACE: usize = 16_384;

/// Oracle output together with the workspace it needed.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMatrix {
    pub matrix: DensityMatrix,
    /// Fock dimension of the workspace the squeeze operator was built on.
    pub workspace_dim: usize,
    /// Number of thermal Fock states propagated.
    pub thermal_terms: usize,
}

/// Density matrix on `0..=truncation` from the squeezed thermal
/// decomposition. The workspace starts at `4 (truncation + 1)` and grows by
/// half until two successive sizes agree within 1e-10 in every entry.
pub fn oracle_density_matrix(state: &GaussianState, truncation: usize) -> Result<OracleMatrix> {
    let (v1, v2) = state.unity_variances();
    let (v1, v2) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
    let r = 0.25 * libm::log(v2 / v1);
    let nbar = (0.5 * (libm::sqrt(v1 * v2) - 1.0)).max(0.0);
    let weights = thermal_weights(nbar)?;
    let dim = truncation + 1;

    let mut workspace = (4 * dim).max(estimate_workspace(r, weights.len(), dim));
    let mut previous = squeezed_thermal_block(r, &weights, workspace, dim);
    loop {
        let next_workspace = workspace + workspace / 2;
        if next_workspace > MAX_WORKSPACE {
            return Err(Error::OracleWorkspace(workspace));
        }
        let next = squeezed_thermal_block(r, &weights, next_workspace, dim);
        let change = previous
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        workspace = next_workspace;
        previous = next;
        if change <= CONVERGENCE {
            break;
        }
    }
    Ok(OracleMatrix {
        matrix: DensityMatrix::from_entries(dim, previous, *state),
        workspace_dim: workspace,
        thermal_terms: weights.len(),
    })
}

/// `P(k) = nbar^k / (nbar + 1)^(k + 1)` up to a tail below [`THERMAL_TAIL`].
fn thermal_weights(nbar: f64) -> Result<Vec<f64>> {
    let q = nbar / (nbar + 1.0);
    let mut weights = vec![1.0 - q];
    let mut tail = q;
    while tail > THERMAL_TAIL {
        if weights.len() >= MAX_WORKSPACE / 2 {
            return Err(Error::OracleWorkspace(MAX_WORKSPACE));
        }
        weights.push(tail * (1.0 - q));
        tail *= q;
    }
    Ok(weights)
}

/// Rough size at which the squeezed amplitudes, decaying like `tanh(r)^(n/2)`,
/// fall below 1e-14.
fn estimate_workspace(r: f64, thermal_terms: usize, dim: usize) -> usize {
    let t = libm::tanh(r);
    let spread = if t > 0.0 {
        (2.0 * libm::log(1e-14) / libm::log(t)).min(MAX_WORKSPACE as f64) as usize
    } else {
        0
    };
    (thermal_terms + dim + spread).min(MAX_WORKSPACE / 2)
}

/// `sum_k P(k) S e_k (S e_k)^T` restricted to rows and columns `< dim`.
fn squeezed_thermal_block(r: f64, weights: &[f64], workspace: usize, dim: usize) -> Vec<f64> {
    let generator = SqueezeGenerator::new(r, workspace);
    let mut block = vec![0.0; dim * dim];
    for (k, &p) in weights.iter().enumerate() {
        let mut column = vec![0.0; workspace];
        column[k] = 1.0;
        let column = generator.exp_apply(column);
        for m in 0..dim {
            let pm = p * column[m];
            for n in 0..dim {
                block[m * dim + n] += pm * column[n];
            }
        }
    }
    block
}

/// `(r/2)(a^2 - a^dag^2)` on Fock states `0..dim`. Real and antisymmetric.
struct SqueezeGenerator {
    half_r: f64,
    /// `sqrt(n (n - 1))`, the matrix element of `a^2` from `n` to `n - 2`.
    lowering: Vec<f64>,
}

impl SqueezeGenerator {
    fn new(r: f64, dim: usize) -> Self {
        let lowering = (0..dim)
            .map(|n| libm::sqrt((n * n.saturating_sub(1)) as f64))
            .collect();
        Self {
            half_r: 0.5 * r,
            lowering,
        }
    }

    fn dim(&self) -> usize {
        self.lowering.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let dim = self.dim();
        for (n, o) in out.iter_mut().enumerate() {
            // (a^2 v)_n = sqrt((n+2)(n+1)) v_{n+2};  (a^dag^2 v)_n = sqrt(n(n-1)) v_{n-2}
            let down = if n + 2 < dim {
                self.lowering[n + 2] * v[n + 2]
            } else {
                0.0
            };
            let up = if n >= 2 {
                self.lowering[n] * v[n - 2]
            } else {
                0.0
            };
            *o = self.half_r * (down - up);
        }
    }

    /// Upper bound on the 1-norm of the generator.
    fn norm_bound(&self) -> f64 {
        let top = self.lowering.last().copied().unwrap_or(0.0);
        2.0 * self.half_r.abs() * top
    }

    /// `exp(G) v` by Taylor series over sub-steps of norm at most one.
    fn exp_apply(&self, mut v: Vec<f64>) -> Vec<f64> {
        let steps = libm::ceil(self.norm_bound()).max(1.0) as usize;
        let h = 1.0 / steps as f64;
        let mut term = vec![0.0; v.len()];
        let mut scratch = vec![0.0; v.len()];
        for _ in 0..steps {
            term.copy_from_slice(&v);
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for j in 1..=60 {
                self.apply(&term, &mut scratch);
                let factor = h / j as f64;
                let mut size = 0.0f64;
                for (t, s) in term.iter_mut().zip(&scratch) {
                    *t = s * factor;
                    size = size.max(t.abs());
                }
                for (x, t) in v.iter_mut().zip(&term) {
                    *x += t;
                }
                if size <= 1e-18 * scale {
                    break;
                }
            }
        }
        v
    }
}
