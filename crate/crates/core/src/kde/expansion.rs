//! Second-order bias and leading variance of the directional-linear
//! estimator at a point:
//!
//! `E f_hat = f + b_q(L)/q tr(H_x f) h^2 + mu_2(K)/2 H_z f g^2`,
//! `Var f_hat = lambda_q(L^2) lambda_q(L)^{-2} R(K) f / (n h^q g)`,
//!
//! where `tr(H_x f)` is the Laplace–Beltrami operator on `S^q` (`f''(theta)`
//! on the circle).

use super::sample::Bandwidths;
use crate::error::{Error, Result};
use crate::kernel::KernelPair;
use crate::special::constants::kernel_constants;

/// Step for the central second differences.
pub const HESSIAN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionPrediction {
    pub density: f64,
    /// Laplace–Beltrami `tr(H_x f)` at the point.
    pub laplacian: f64,
    /// `d^2 f / dz^2` at the point.
    pub d2z: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Orthonormal basis of the tangent space of `S^q` at `x`.
pub fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let d = x.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in 0..d {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        let project = |u: &[f64], v: &mut Vec<f64>| {
            let c: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= c * ui);
        };
        project(x, &mut v);
        for b in &basis {
            project(b, &mut v);
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|c| *c /= norm);
            basis.push(v);
        }
        if basis.len() == d - 1 {
            break;
        }
    }
    basis
}

/// Laplace–Beltrami operator of `f` on the sphere at `x`, as the sum of
/// second derivatives along orthogonal great circles.
pub fn laplace_beltrami<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], step: f64) -> Result<f64> {
    let f0 = f(x);
    let mut total = 0.0;
    for e in tangent_basis(x) {
        let along = |t: f64| -> Vec<f64> { x.iter().zip(&e).map(|(a, b)| t.cos() * a + t.sin() * b).collect() };
        let fp = f(&along(step));
        let fm = f(&along(-step));
        total += (fp - 2.0 * f0 + fm) / (step * step);
    }
    if !total.is_finite() {
        return Err(Error::Numerical(format!("non-finite directional Hessian trace at {x:?}")));
    }
    Ok(total)
}

pub fn bias_variance_expansion<F: Fn(&[f64], f64) -> f64>(
    f: F,
    x: &[f64],
    z: f64,
    bw: &Bandwidths,
    kernel: &KernelPair,
    n: usize,
) -> Result<ExpansionPrediction> {
    bw.check_dirlin()?;
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let q = x.len() - 1;
    let c = kernel_constants(kernel, q, bw.h)?;
    let density = f(x, z);
    let laplacian = laplace_beltrami(|y| f(y, z), x, HESSIAN_STEP)?;
    let s = HESSIAN_STEP;
    let d2z = (f(x, z + s) - 2.0 * density + f(x, z - s)) / (s * s);
    if !d2z.is_finite() || !density.is_finite() {
        return Err(Error::Numerical(format!("non-finite linear second derivative at z = {z}")));
    }
    let qf = q as f64;
    let mean = density + c.b_q / qf * laplacian * bw.h * bw.h + 0.5 * c.mu2_k * d2z * bw.g * bw.g;
    let variance = c.variance_constant() * density / (n as f64 * bw.h.powi(q as i32) * bw.g);
    Ok(ExpansionPrediction { density, laplacian, d2z, mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_laplacian_is_second_angular_derivative() {
        let f = |x: &[f64]| (2.0 * x[1].atan2(x[0]).cos()).exp();
        let t: f64 = 0.7;
        let v = laplace_beltrami(f, &[t.cos(), t.sin()], HESSIAN_STEP).unwrap();
        // d^2/dt^2 exp(2 cos t) = exp(2 cos t) (4 sin^2 t - 2 cos t)
        let exact = (2.0 * t.cos()).exp() * (4.0 * t.sin().powi(2) - 2.0 * t.cos());
        assert!((v - exact).abs() < 1e-5 * exact.abs().max(1.0));
    }

    #[test]
    fn sphere_laplacian_of_linear_function() {
        // Laplace–Beltrami of x_3 on S^2 is -2 x_3
        let x = [0.6, 0.0, 0.8];
        let v = laplace_beltrami(|y| y[2], &x, HESSIAN_STEP).unwrap();
        assert!((v + 1.6).abs() < 1e-6);
    }

    #[test]
    fn flat_in_z_has_no_linear_bias_and_variance_scales() {
        let bw = Bandwidths::new(0.5, 0.5).unwrap();
        let k = KernelPair::default();
        let f = |x: &[f64], _z: f64| 0.1 + 0.05 * x[0];
        let a = bias_variance_expansion(f, &[1.0, 0.0], 0.0, &bw, &k, 100).unwrap();
        assert_eq!(a.d2z, 0.0);
        let b = bias_variance_expansion(f, &[1.0, 0.0], 0.0, &bw, &k, 200).unwrap();
        assert!((a.variance / b.variance - 2.0).abs() < 1e-12);
    }
}
