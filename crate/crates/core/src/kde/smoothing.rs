//! The smoothing operator `LK_{h,g} f`, the expectation of the kernel
//! estimator under `f`.

use ndarray::Array2;

use super::estimator::{directional_kernel_matrix, linear_kernel_matrix, DirectionalWeight};
use super::sample::{Bandwidths, Directions};
use crate::error::{Error, Result};
use crate::kernel::KernelPair;
use crate::special::grid::{
    DirectionalNodes, GridPoint, LineNodes, NeumaierSum, QuadratureGrid, SecondCoord, SecondFactor, Support,
};

/// Circle nodes per unit of `1/h` in the inner smoothing grid.
const CIRCLE_NODES_PER_INV_H: f64 = 8.0;
/// Inner line spacing as a fraction of `g`.
const LINE_SPACING_OVER_G: f64 = 0.5;
const MAX_INNER_LINE: usize = 4096;
const MIN_INNER_LINE: usize = 64;

fn check_point_against(grid: &QuadratureGrid, eval: &GridPoint<'_>) -> Result<()> {
    let ok = match (grid.support(), eval.second) {
        (Support::CircleLine, SecondCoord::Line(_)) => eval.x.len() == 2,
        (Support::SphereLine, SecondCoord::Line(_)) => eval.x.len() == 3,
        (Support::CircleCircle, SecondCoord::Direction(y)) => eval.x.len() == 2 && y.len() == 2,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::SupportMismatch {
            expected: format!("evaluation point on the {} support", grid.support()),
            found: format!("point with first factor in R^{}", eval.x.len()),
        })
    }
}

/// `LK_{h,g} f` at one point by quadrature over `grid`. On the torus the
/// directional kernel is used in both factors with bandwidths `(h, g)`.
pub fn smooth_density<F: Fn(&GridPoint<'_>) -> f64>(
    f: F,
    eval: &GridPoint<'_>,
    bw: &Bandwidths,
    kernel: &KernelPair,
    grid: &QuadratureGrid,
) -> Result<f64> {
    check_point_against(grid, eval)?;
    let q = grid.first().dim() - 1;
    let w1 = DirectionalWeight::new(&kernel.directional, q, bw.h)?;
    let torus = grid.support() == Support::CircleCircle;
    let w2 = if torus {
        bw.check_dirdir()?;
        Some(DirectionalWeight::new(&kernel.directional, 1, bw.g)?)
    } else {
        bw.check_dirlin()?;
        None
    };
    let mut acc = NeumaierSum::default();
    let mut failure = None;
    grid.for_each(|i, j, p, w| {
        if failure.is_some() {
            return;
        }
        let v = f(&p);
        if !v.is_finite() || v < 0.0 {
            failure = Some(Error::NonFinite { index: i * grid.second_len() + j, location: format!("density value {v}") });
            return;
        }
        let a = w1.at_dot(dot(eval.x, p.x));
        let b = match (eval.second, p.second, &w2) {
            (SecondCoord::Line(z), SecondCoord::Line(t), None) => kernel.linear.eval((z - t) / bw.g) / bw.g,
            (SecondCoord::Direction(y), SecondCoord::Direction(u), Some(w2)) => w2.at_dot(dot(y, u)),
            _ => unreachable!("support checked above"),
        };
        acc.add(w * a * b * v);
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(acc.sum()),
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Separable smoothing operator from an inner quadrature grid to the nodes
/// of an outer grid: `LK f = D F S'` with `F` the density on the inner grid.
#[derive(Debug, Clone)]
pub struct GridSmoother {
    inner: QuadratureGrid,
    first: Array2<f64>,
    second: Array2<f64>,
}

fn inner_circle(outer: usize, h: f64) -> DirectionalNodes {
    let needed = (CIRCLE_NODES_PER_INV_H / h).ceil() as usize;
    DirectionalNodes::circle(outer.max(needed))
}

fn nodes_as_directions(nodes: &DirectionalNodes) -> Directions {
    Directions::normalized(nodes.dim(), nodes.points().to_vec()).expect("grid nodes are unit vectors")
}

/// Weighted kernel matrix `M[i,k] = c L((1 - x_i'y_k)/h^2) w_k`.
fn weighted_directional(
    outer: &DirectionalNodes,
    inner: &DirectionalNodes,
    h: f64,
    kernel: &crate::kernel::DirectionalKernel,
) -> Result<Array2<f64>> {
    let mut m = directional_kernel_matrix(outer, &nodes_as_directions(inner), h, kernel)?;
    for mut row in m.rows_mut() {
        row.iter_mut().zip(inner.weights()).for_each(|(a, w)| *a *= w);
    }
    Ok(m)
}

impl GridSmoother {
    pub fn new(outer: &QuadratureGrid, bw: &Bandwidths, kernel: &KernelPair) -> Result<Self> {
        let first_inner = match outer.support() {
            Support::SphereLine => outer.first().clone(),
            _ => inner_circle(outer.first().len(), bw.h),
        };
        let first = weighted_directional(outer.first(), &first_inner, bw.h, &kernel.directional)?;
        let (second_inner, second) = match outer.second() {
            SecondFactor::Line(line) => {
                bw.check_dirlin()?;
                let (a, b) = line.bounds();
                let m = (((b - a) / (LINE_SPACING_OVER_G * bw.g)).ceil() as usize + 1)
                    .clamp(line.len().max(MIN_INNER_LINE), MAX_INNER_LINE);
                let inner = LineNodes::uniform(m, a, b)?;
                let mut s = linear_kernel_matrix(line.nodes(), inner.nodes(), bw.g, &kernel.linear);
                for mut row in s.rows_mut() {
                    row.iter_mut().zip(inner.weights()).for_each(|(v, w)| *v *= w);
                }
                (SecondFactor::Line(inner), s)
            }
            SecondFactor::Directional(nodes) => {
                bw.check_dirdir()?;
                let inner = inner_circle(nodes.len(), bw.g);
                let s = weighted_directional(nodes, &inner, bw.g, &kernel.directional)?;
                (SecondFactor::Directional(inner), s)
            }
        };
        let inner = QuadratureGrid::from_factors(first_inner, second_inner)?;
        Ok(Self { inner, first, second })
    }

    /// Grid on which the density to be smoothed must be tabulated.
    pub fn inner(&self) -> &QuadratureGrid {
        &self.inner
    }

    /// Smooths values tabulated on the inner grid onto the outer grid.
    pub fn apply(&self, f_inner: &Array2<f64>) -> Result<Array2<f64>> {
        if f_inner.dim() != self.inner.shape() {
            return Err(Error::Domain(format!(
                "density tabulated on {:?}, inner grid is {:?}",
                f_inner.dim(),
                self.inner.shape()
            )));
        }
        Ok(self.first.dot(f_inner).dot(&self.second.t()))
    }

    /// Tabulates `f` on the inner grid and smooths it.
    pub fn smooth<F: Fn(&GridPoint<'_>) -> f64>(&self, f: F) -> Result<Array2<f64>> {
        let (m1, m2) = self.inner.shape();
        let values = self.inner.tabulate(f);
        let arr = Array2::from_shape_vec((m1, m2), values).expect("tabulated grid shape");
        if let Some(k) = arr.iter().position(|v| !v.is_finite()) {
            let (i, j) = (k / m2, k % m2);
            return Err(Error::NonFinite { index: k, location: format!("inner node ({i}, {j})") });
        }
        self.apply(&arr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel::bessel_i;
    use std::f64::consts::PI;

    fn vm_normal(p: &GridPoint<'_>) -> f64 {
        let i0 = bessel_i(0.0, 1.0).unwrap().value;
        let z = p.z();
        p.theta().cos().exp() / (2.0 * PI * i0) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn smoothing_preserves_mass() {
        let grid = QuadratureGrid::circle_line(128, LineNodes::centered(96, 0.0, 1.0, 7.0).unwrap());
        let bw = Bandwidths::new(0.4, 0.3).unwrap();
        let s = GridSmoother::new(&grid, &bw, &KernelPair::default()).unwrap();
        let lk = s.smooth(vm_normal).unwrap();
        let mass = grid.integrate_values(lk.as_slice().unwrap()).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn operator_matches_pointwise_quadrature() {
        let grid = QuadratureGrid::circle_line(64, LineNodes::centered(48, 0.0, 1.0, 7.0).unwrap());
        let bw = Bandwidths::new(0.5, 0.5).unwrap();
        let k = KernelPair::default();
        let s = GridSmoother::new(&grid, &bw, &k).unwrap();
        let lk = s.smooth(vm_normal).unwrap();
        let fine = QuadratureGrid::circle_line(256, LineNodes::centered(200, 0.0, 1.0, 8.0).unwrap());
        for &(i, j) in &[(0, 24), (10, 20), (40, 30)] {
            let p = grid.point(i, j);
            let direct = smooth_density(vm_normal, &p, &bw, &k, &fine).unwrap();
            assert!((lk[[i, j]] - direct).abs() < 1e-7, "{} vs {direct}", lk[[i, j]]);
        }
    }

    #[test]
    fn torus_mass_and_mismatch() {
        let grid = QuadratureGrid::circle_circle(64, 64);
        let bw = Bandwidths::dirdir(0.3, 0.6).unwrap();
        let s = GridSmoother::new(&grid, &bw, &KernelPair::default()).unwrap();
        let lk = s.smooth(|p| (1.0 + 0.5 * (p.theta() - p.psi()).cos()) / (4.0 * PI * PI)).unwrap();
        assert!((grid.integrate_values(lk.as_slice().unwrap()).unwrap() - 1.0).abs() < 1e-10);
        let eval = GridPoint { x: &[1.0, 0.0], second: SecondCoord::Line(0.0) };
        assert!(matches!(
            smooth_density(|_| 1.0, &eval, &bw, &KernelPair::default(), &grid),
            Err(Error::SupportMismatch { .. })
        ));
    }
}
