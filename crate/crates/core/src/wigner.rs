//! Wigner quasi-probability density of a zero-mean Gaussian state on a
//! rectangular phase-space grid.
//!
//! The density is the normalized bivariate Gaussian
//! `W = exp(-x1^2 / (2 v1) - x2^2 / (2 v2)) / (2 pi sqrt(v1 v2))`, so it
//! integrates to one and its projections are the quadrature distributions.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, GaussianState, Result, VarianceConvention};

/// Symmetric grid `[-extent, extent]` along each quadrature, endpoints
/// included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x1_extent: f64,
    pub x2_extent: f64,
    pub x1_points: usize,
    pub x2_points: usize,
}

impl GridSpec {
    /// Grid reaching `sigmas` standard deviations of `state` along each axis.
    pub fn covering(state: &GaussianState, sigmas: f64, points: usize) -> Self {
        Self {
            x1_extent: sigmas * libm::sqrt(state.v1()),
            x2_extent: sigmas * libm::sqrt(state.v2()),
            x1_points: points,
            x2_points: points,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.x1_extent.is_finite() && self.x1_extent > 0.0) {
            return Err(Error::InvalidGrid("x1 extent must be positive"));
        }
        if !(self.x2_extent.is_finite() && self.x2_extent > 0.0) {
            return Err(Error::InvalidGrid("x2 extent must be positive"));
        }
        if self.x1_points < 2 || self.x2_points < 2 {
            return Err(Error::InvalidGrid("need at least two points per axis"));
        }
        Ok(())
    }
}

/// Wigner function sampled on a grid. `values` is row-major with rows along
/// `x1`: `values[i * x2_axis.len() + j] = W(x1_axis[i], x2_axis[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x1_axis: Vec<f64>,
    pub x2_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub convention: VarianceConvention,
}

fn axis(extent: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * extent / (points - 1) as f64;
    (0..points).map(|i| -extent + step * i as f64).collect()
}

/// Evaluates the Wigner function of `state` on `grid`, in the state's own
/// variance convention.
pub fn wigner_eval(state: &GaussianState, grid: &GridSpec) -> Result<WignerGrid> {
    grid.validate()?;
    let (v1, v2) = (state.v1(), state.v2());
    let norm = 1.0 / (2.0 * PI * libm::sqrt(v1 * v2));
    let x1_axis = axis(grid.x1_extent, grid.x1_points);
    let x2_axis = axis(grid.x2_extent, grid.x2_points);
    let mut values = Vec::with_capacity(x1_axis.len() * x2_axis.len());
    for &x1 in &x1_axis {
        let e1 = -0.5 * x1 * x1 / v1;
        values.extend(
            x2_axis
                .iter()
                .map(|&x2| norm * libm::exp(e1 - 0.5 * x2 * x2 / v2)),
        );
    }
    Ok(WignerGrid {
        x1_axis,
        x2_axis,
        values,
        convention: state.convention(),
    })
}

impl WignerGrid {
    /// Grid spacing along `x1`.
    pub fn dx1(&self) -> f64 {
        self.x1_axis[1] - self.x1_axis[0]
    }

    /// Grid spacing along `x2`.
    pub fn dx2(&self) -> f64 {
        self.x2_axis[1] - self.x2_axis[0]
    }

    /// Value at grid indices `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.x2_axis.len() + j]
    }

    /// Riemann sum of the values times the cell area.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx1() * self.dx2()
    }

    /// Projection onto `x1`: the density of `X1` integrated over `x2`.
    pub fn marginal_x1(&self) -> Vec<f64> {
        let n2 = self.x2_axis.len();
        let dx2 = self.dx2();
        self.values
            .chunks_exact(n2)
            .map(|row| row.iter().sum::<f64>() * dx2)
            .collect()
    }

    /// Projection onto `x2`: the density of `X2` integrated over `x1`.
    pub fn marginal_x2(&self) -> Vec<f64> {
        let n2 = self.x2_axis.len();
        let dx1 = self.dx1();
        let mut out = alloc::vec![0.0; n2];
        for row in self.values.chunks_exact(n2) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o *= dx1);
        out
    }

    /// Second moment of the `x1` projection.
    pub fn marginal_variance_x1(&self) -> f64 {
        second_moment(&self.x1_axis, &self.marginal_x1())
    }

    /// Second moment of the `x2` projection.
    pub fn marginal_variance_x2(&self) -> f64 {
        second_moment(&self.x2_axis, &self.marginal_x2())
    }
}

fn second_moment(axis: &[f64], density: &[f64]) -> f64 {
    let dx = axis[1] - axis[0];
    let mass: f64 = density.iter().sum::<f64>() * dx;
    axis.iter()
        .zip(density)
        .map(|(x, p)| x * x * p)
        .sum::<f64>()
        * dx
        / mass
}
