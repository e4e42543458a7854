//! The independence statistic `T_n` and the goodness-of-fit statistic
//! `R_n`, both squared L2 distances evaluated by product quadrature.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::kde::{Bandwidths, GridKernels, GridSmoother};
use crate::kernel::KernelPair;
use crate::models::{JointModel, JointSample, MixtureAlternative};
use crate::special::grid::{LineNodes, QuadratureGrid, Support};

pub const CIRCLE_NODES: usize = 128;
pub const LINE_NODES: usize = 96;
pub const TORUS_NODES: usize = 96;
/// Half-width of the line box in sample standard deviations.
pub const LINE_TRUNCATION: f64 = 7.0;
/// The line box also covers every observation by this many `g`.
pub const LINE_BANDWIDTH_MARGIN: f64 = 4.0;

/// Node counts of the statistic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub circle: usize,
    pub line: usize,
    pub torus: usize,
    pub truncation: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { circle: CIRCLE_NODES, line: LINE_NODES, torus: TORUS_NODES, truncation: LINE_TRUNCATION }
    }
}

impl GridSpec {
    /// `(first, second)` node counts for a support.
    pub fn shape(&self, support: Support) -> (usize, usize) {
        match support {
            Support::CircleCircle => (self.torus, self.torus),
            _ => (self.circle, self.line),
        }
    }
}

/// Grid for a sample: the full circle(s), and on the line the union of
/// `mean +- T sd` and `[min - 4g, max + 4g]` with Gauss–Legendre nodes.
pub fn statistic_grid(sample: &JointSample, bw: &Bandwidths, spec: &GridSpec) -> Result<QuadratureGrid> {
    match sample.support() {
        Support::CircleCircle => Ok(QuadratureGrid::circle_circle(spec.torus, spec.torus)),
        _ => {
            let z = sample.second();
            if z.is_empty() {
                return Err(Error::EmptySample);
            }
            let n = z.len() as f64;
            let mean = z.iter().sum::<f64>() / n;
            let sd = (z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
            let (lo, hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let m = LINE_BANDWIDTH_MARGIN * bw.g;
            let lower = (mean - spec.truncation * sd).min(lo - m);
            let upper = (mean + spec.truncation * sd).max(hi + m);
            Ok(QuadratureGrid::circle_line(spec.circle, LineNodes::interval(spec.line, lower, upper)?))
        }
    }
}

/// Kernel matrices of a sample on a grid. On the torus both factors use the
/// directional kernel.
pub fn grid_kernels(sample: &JointSample, grid: &QuadratureGrid, bw: &Bandwidths, kernel: &KernelPair) -> Result<GridKernels> {
    match sample {
        JointSample::CircleLine(s) => GridKernels::dirlin(s, grid, bw, kernel),
        JointSample::CircleCircle(s) => GridKernels::dirdir(s, grid, bw, &kernel.directional, &kernel.directional),
    }
}

fn weighted_sq_sum(grid: &QuadratureGrid, diff: impl Fn(usize, usize) -> f64) -> f64 {
    let w1 = grid.first().weights();
    let w2 = grid.second_weights();
    let mut total = 0.0;
    for (i, &a) in w1.iter().enumerate() {
        let mut row = 0.0;
        for (j, &b) in w2.iter().enumerate() {
            let d = diff(i, j);
            row += b * d * d;
        }
        total += a * row;
    }
    total
}

/// `T_n` from precomputed kernel matrices; `perm` re-pairs the second
/// coordinate (the marginal estimates do not change).
pub fn indep_statistic_from(gk: &GridKernels, grid: &QuadratureGrid, perm: Option<&[usize]>) -> f64 {
    let joint = match perm {
        Some(p) => gk.joint_permuted(p),
        None => gk.joint(),
    };
    let fx = gk.first_marginal();
    let fz = gk.second_marginal();
    weighted_sq_sum(grid, |i, j| joint[[i, j]] - fx[i] * fz[j])
}

/// `T_n = int (f_joint - f_X f_Z)^2`.
pub fn indep_statistic(sample: &JointSample, bw: &Bandwidths, kernel: &KernelPair, grid: &QuadratureGrid) -> Result<f64> {
    check_grid(sample.support(), grid)?;
    let gk = grid_kernels(sample, grid, bw, kernel)?;
    Ok(indep_statistic_from(&gk, grid, None))
}

/// `R_n = int (f_hat - LK f_model)^2` with the smoothed model already on the grid.
pub fn gof_statistic(
    sample: &JointSample,
    smoothed: &Array2<f64>,
    bw: &Bandwidths,
    kernel: &KernelPair,
    grid: &QuadratureGrid,
) -> Result<f64> {
    check_grid(sample.support(), grid)?;
    if smoothed.dim() != grid.shape() {
        return Err(Error::Domain(format!("smoothed density has shape {:?}, grid is {:?}", smoothed.dim(), grid.shape())));
    }
    let fhat = grid_kernels(sample, grid, bw, kernel)?.joint();
    Ok(gof_statistic_from(&fhat, smoothed, grid))
}

pub fn gof_statistic_from(fhat: &Array2<f64>, smoothed: &Array2<f64>, grid: &QuadratureGrid) -> f64 {
    weighted_sq_sum(grid, |i, j| fhat[[i, j]] - smoothed[[i, j]])
}

/// `LK_{h,g} f_model` on the smoother's outer grid.
pub fn smooth_model(model: &JointModel, smoother: &GridSmoother) -> Result<Array2<f64>> {
    let inner = smoother.inner();
    let values = model.tabulate(inner)?;
    smooth_values(values, smoother)
}

/// `LK_{h,g}` of a mixture alternative.
pub fn smooth_alternative(alt: &MixtureAlternative, smoother: &GridSmoother) -> Result<Array2<f64>> {
    let values = alt.tabulate(smoother.inner())?;
    smooth_values(values, smoother)
}

fn smooth_values(values: Vec<f64>, smoother: &GridSmoother) -> Result<Array2<f64>> {
    let shape = smoother.inner().shape();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: k, location: format!("inner node ({}, {})", k / shape.1, k % shape.1) });
    }
    let arr = Array2::from_shape_vec(shape, values).expect("tabulated grid shape");
    smoother.apply(&arr)
}

pub(crate) fn check_grid(support: Support, grid: &QuadratureGrid) -> Result<()> {
    if support != grid.support() {
        return Err(Error::SupportMismatch { expected: format!("{support} grid"), found: format!("{} grid", grid.support()) });
    }
    Ok(())
}

/// `int f^2` of a tabulated first-factor density.
pub(crate) fn first_roughness(grid: &QuadratureGrid, f: &[f64]) -> f64 {
    grid.first().weights().iter().zip(f).map(|(w, v)| w * v * v).sum()
}

/// `int f^2` of a tabulated second-factor density.
pub(crate) fn second_roughness(grid: &QuadratureGrid, f: &[f64]) -> f64 {
    grid.second_weights().iter().zip(f).map(|(w, v)| w * v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kde::DirLinSample;

    #[test]
    fn grid_covers_sample_and_bandwidth_margin() {
        let s = JointSample::CircleLine(DirLinSample::from_angles(&[0.1, 2.0, 4.0], &[0.0, 0.0, 30.0]).unwrap());
        let bw = Bandwidths::new(0.3, 0.5).unwrap();
        let grid = statistic_grid(&s, &bw, &GridSpec::default()).unwrap();
        let (a, b) = grid.line().unwrap().bounds();
        assert!(a <= -2.0 && b >= 32.0);
        assert_eq!(grid.shape(), (CIRCLE_NODES, LINE_NODES));
    }

    #[test]
    fn identical_densities_give_zero() {
        let s = JointSample::CircleLine(DirLinSample::from_angles(&[0.1, 2.0, 4.0], &[0.0, 1.0, 2.0]).unwrap());
        let bw = Bandwidths::new(0.3, 0.5).unwrap();
        let kernel = KernelPair::default();
        let grid = statistic_grid(&s, &bw, &GridSpec::default()).unwrap();
        let fhat = grid_kernels(&s, &grid, &bw, &kernel).unwrap().joint();
        assert_eq!(gof_statistic(&s, &fhat, &bw, &kernel, &grid).unwrap(), 0.0);
    }
}
