//! Pointwise and grid-wise kernel density estimators.
//!
//! Grid evaluation is separable: with `A[i,k] = c L((1 - x_i'X_k)/h^2)` and
//! `B[j,k] = K((z_j - Z_k)/g)/g`, the joint estimate on the grid is
//! `A B' / n` and the marginals are the row means of `A` and `B`.

use ndarray::{Array1, Array2};

use super::sample::{check_directional, Bandwidths, DirDirSample, DirLinSample, Directions};
use crate::error::{Error, Result};
use crate::kernel::{DirectionalKernel, KernelPair, LinearKernel};
use crate::special::grid::{DirectionalNodes, NeumaierSum, QuadratureGrid, SecondFactor, Support};

/// Evaluates `c_{h,q}(L) L((1 - t)/h^2)` for a fixed bandwidth.
#[derive(Debug, Clone)]
pub struct DirectionalWeight<'a> {
    kernel: &'a DirectionalKernel,
    inv_h2: f64,
    log_c: f64,
    c: f64,
}

impl<'a> DirectionalWeight<'a> {
    pub fn new(kernel: &'a DirectionalKernel, q: usize, h: f64) -> Result<Self> {
        check_directional(h)?;
        let log_c = kernel.log_normalizer(q, h)?;
        Ok(Self { kernel, inv_h2: 1.0 / (h * h), log_c, c: log_c.exp() })
    }

    /// `ln c_{h,q}(L)`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_c
    }

    /// Kernel weight for the inner product `t = x'X`.
    #[inline]
    pub fn at_dot(&self, t: f64) -> f64 {
        let r = (1.0 - t).max(0.0) * self.inv_h2;
        match self.kernel {
            DirectionalKernel::VonMises => (self.log_c - r).exp(),
            k => self.c * k.eval(r),
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_eval_direction(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::Domain(format!("evaluation point has dimension {}, sample has {dim}", x.len())));
    }
    let norm = dot(x, x).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("evaluation direction has norm {norm}")));
    }
    Ok(())
}

/// Directional-linear estimator at `(x, z)`.
pub fn kde_dirlin(sample: &DirLinSample, x: &[f64], z: f64, bw: &Bandwidths, kernel: &KernelPair) -> Result<f64> {
    bw.check_dirlin()?;
    let dirs = sample.directions();
    check_eval_direction(x, dirs.dim())?;
    let w = DirectionalWeight::new(&kernel.directional, dirs.q(), bw.h)?;
    let mut acc = NeumaierSum::default();
    for (xi, &zi) in dirs.iter().zip(sample.linear()) {
        let a = w.at_dot(dot(x, xi));
        if a != 0.0 {
            acc.add(a * kernel.linear.eval((z - zi) / bw.g));
        }
    }
    Ok((acc.sum() / (sample.len() as f64 * bw.g)).max(0.0))
}

/// Directional estimator at `x`.
pub fn kde_directional(dirs: &Directions, x: &[f64], h: f64, kernel: &DirectionalKernel) -> Result<f64> {
    if dirs.is_empty() {
        return Err(Error::EmptySample);
    }
    check_eval_direction(x, dirs.dim())?;
    let w = DirectionalWeight::new(kernel, dirs.q(), h)?;
    let acc: NeumaierSum = dirs.iter().map(|xi| w.at_dot(dot(x, xi))).collect();
    Ok((acc.sum() / dirs.len() as f64).max(0.0))
}

/// Linear estimator at `u`.
pub fn kde_linear(z: &[f64], u: f64, g: f64, kernel: &LinearKernel) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidBandwidth(format!("g must be positive, got {g}")));
    }
    let acc: NeumaierSum = z.iter().map(|&zi| kernel.eval((u - zi) / g)).collect();
    Ok((acc.sum() / (z.len() as f64 * g)).max(0.0))
}

/// Directional-directional estimator at `(x, y)` with bandwidths `(h1, h2)`.
pub fn kde_dirdir(
    sample: &DirDirSample,
    x: &[f64],
    y: &[f64],
    bw: &Bandwidths,
    first: &DirectionalKernel,
    second: &DirectionalKernel,
) -> Result<f64> {
    bw.check_dirdir()?;
    check_eval_direction(x, sample.first().dim())?;
    check_eval_direction(y, sample.second().dim())?;
    let w1 = DirectionalWeight::new(first, sample.first().q(), bw.h)?;
    let w2 = DirectionalWeight::new(second, sample.second().q(), bw.g)?;
    let mut acc = NeumaierSum::default();
    for (xi, yi) in sample.first().iter().zip(sample.second().iter()) {
        let a = w1.at_dot(dot(x, xi));
        if a != 0.0 {
            acc.add(a * w2.at_dot(dot(y, yi)));
        }
    }
    Ok((acc.sum() / sample.len() as f64).max(0.0))
}

/// `A[i,k] = c L((1 - x_i'X_k)/h^2)` over grid nodes `x_i` and data `X_k`.
pub fn directional_kernel_matrix(
    nodes: &DirectionalNodes,
    dirs: &Directions,
    h: f64,
    kernel: &DirectionalKernel,
) -> Result<Array2<f64>> {
    if nodes.dim() != dirs.dim() {
        return Err(Error::SupportMismatch {
            expected: format!("directions in R^{}", nodes.dim()),
            found: format!("directions in R^{}", dirs.dim()),
        });
    }
    let w = DirectionalWeight::new(kernel, dirs.q(), h)?;
    let n = dirs.len();
    let mut a = Array2::zeros((nodes.len(), n));
    for (i, mut row) in a.rows_mut().into_iter().enumerate() {
        let x = nodes.point(i);
        for (k, xk) in dirs.iter().enumerate() {
            row[k] = w.at_dot(dot(x, xk));
        }
    }
    Ok(a)
}

/// `B[j,k] = K((z_j - Z_k)/g)/g`.
pub fn linear_kernel_matrix(nodes: &[f64], z: &[f64], g: f64, kernel: &LinearKernel) -> Array2<f64> {
    let inv = 1.0 / g;
    let mut b = Array2::zeros((nodes.len(), z.len()));
    for (j, mut row) in b.rows_mut().into_iter().enumerate() {
        let u = nodes[j];
        for (k, &zk) in z.iter().enumerate() {
            row[k] = kernel.eval((u - zk) * inv) * inv;
        }
    }
    b
}

/// Kernel matrices of a sample against a grid, reusable across statistics.
#[derive(Debug, Clone)]
pub struct GridKernels {
    /// First factor, `grid.first().len() x n`.
    pub first: Array2<f64>,
    /// Second factor, `grid.second_len() x n`.
    pub second: Array2<f64>,
}

impl GridKernels {
    pub fn dirlin(sample: &DirLinSample, grid: &QuadratureGrid, bw: &Bandwidths, kernel: &KernelPair) -> Result<Self> {
        bw.check_dirlin()?;
        let line = match grid.second() {
            SecondFactor::Line(l) => l,
            SecondFactor::Directional(_) => return Err(support_mismatch(grid.support(), "directional-linear sample")),
        };
        let first = directional_kernel_matrix(grid.first(), sample.directions(), bw.h, &kernel.directional)?;
        let second = linear_kernel_matrix(line.nodes(), sample.linear(), bw.g, &kernel.linear);
        Ok(Self { first, second })
    }

    pub fn dirdir(
        sample: &DirDirSample,
        grid: &QuadratureGrid,
        bw: &Bandwidths,
        first: &DirectionalKernel,
        second: &DirectionalKernel,
    ) -> Result<Self> {
        bw.check_dirdir()?;
        let nodes2 = match grid.second() {
            SecondFactor::Directional(d) => d,
            SecondFactor::Line(_) => return Err(support_mismatch(grid.support(), "directional-directional sample")),
        };
        Ok(Self {
            first: directional_kernel_matrix(grid.first(), sample.first(), bw.h, first)?,
            second: directional_kernel_matrix(nodes2, sample.second(), bw.g, second)?,
        })
    }

    pub fn n(&self) -> usize {
        self.first.ncols()
    }

    /// Joint estimate on the grid.
    pub fn joint(&self) -> Array2<f64> {
        let mut f = self.first.dot(&self.second.t());
        f /= self.n() as f64;
        f
    }

    /// Joint estimate with the second coordinate re-paired as `perm`.
    pub fn joint_permuted(&self, perm: &[usize]) -> Array2<f64> {
        let second = self.second.select(ndarray::Axis(1), perm);
        let mut f = self.first.dot(&second.t());
        f /= self.n() as f64;
        f
    }

    pub fn first_marginal(&self) -> Array1<f64> {
        self.first.mean_axis(ndarray::Axis(1)).expect("non-empty sample")
    }

    pub fn second_marginal(&self) -> Array1<f64> {
        self.second.mean_axis(ndarray::Axis(1)).expect("non-empty sample")
    }
}

pub(crate) fn support_mismatch(found: Support, expected: &str) -> Error {
    Error::SupportMismatch { expected: expected.to_string(), found: format!("{found} grid") }
}

/// Directional-linear estimate on every grid node (row-major in the grid's
/// `(first, second)` shape).
pub fn kde_dirlin_grid(
    sample: &DirLinSample,
    grid: &QuadratureGrid,
    bw: &Bandwidths,
    kernel: &KernelPair,
) -> Result<Array2<f64>> {
    Ok(GridKernels::dirlin(sample, grid, bw, kernel)?.joint())
}

/// Directional-directional estimate on every grid node.
pub fn kde_dirdir_grid(
    sample: &DirDirSample,
    grid: &QuadratureGrid,
    bw: &Bandwidths,
    first: &DirectionalKernel,
    second: &DirectionalKernel,
) -> Result<Array2<f64>> {
    Ok(GridKernels::dirdir(sample, grid, bw, first, second)?.joint())
}
