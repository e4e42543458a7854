//! Kernel-derived constants and the CLT variance factors.
//!
//! With `omega_q` the area of `S^q`:
//!
//! * `lambda_q(L^j) = 2^{q/2-1} omega_{q-1} int_0^inf L^j(r) r^{q/2-1} dr`
//! * `lambda_{h,q}(L) h^q = omega_{q-1} int_0^pi L((1 - cos t)/h^2) sin^{q-1} t dt`,
//!   the exact inverse normalizing constant at bandwidth `h`
//! * `b_q(L) = int L(r) r^{q/2} dr / int L(r) r^{q/2-1} dr`
//! * `mu_2(K) = int u^2 K(u) du`, `R(K) = int K(u)^2 du`
//!
//! Radial integrals are computed in `s = sqrt(r)` to remove the `r^{-1/2}`
//! endpoint singularity at `q = 1`.

use crate::error::{Error, Result};
use crate::kernel::{DirectionalKernel, KernelPair, LinearKernel};
use crate::special::omega;
use crate::special::quadrature::{integrate_adaptive, integrate_real_line, integrate_semi_infinite, AdaptiveOptions};

const RADIAL_TOL: AdaptiveOptions = AdaptiveOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_segments: 4000 };
/// Truncation of the radial integrals in the variance factor.
pub const PHI_TRUNCATION: f64 = 50.0;
const PHI_TOL: AdaptiveOptions = AdaptiveOptions { abs_tol: 1e-12, rel_tol: 1e-9, max_segments: 2000 };

/// Constants attached to a kernel pair, a dimension and a bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub q: usize,
    pub h: f64,
    /// `lambda_q(L)`.
    pub lambda_l: f64,
    /// `lambda_q(L^2)`.
    pub lambda_l2: f64,
    /// `lambda_{h,q}(L)`.
    pub lambda_hq: f64,
    /// `c_{h,q}(L)`.
    pub c_hq: f64,
    pub b_q: f64,
    pub mu2_k: f64,
    pub r_k: f64,
}

impl KernelConstants {
    /// `lambda_q(L^2) lambda_q(L)^{-2} R(K)`, the leading variance constant.
    pub fn variance_constant(&self) -> f64 {
        self.lambda_l2 / (self.lambda_l * self.lambda_l) * self.r_k
    }
}

fn check_q(q: usize) -> Result<()> {
    if q == 0 {
        Err(Error::UnsupportedDimension(q))
    } else {
        Ok(())
    }
}

fn not_admissible(what: &str, e: Error) -> Error {
    Error::KernelNotAdmissible(format!("{what} diverges or fails to converge ({e})"))
}

/// `int_0^inf L(r)^power r^{q/2 - 1 + extra} dr`.
fn radial_moment(kernel: &DirectionalKernel, q: usize, power: i32, extra: f64) -> Result<f64> {
    let a = q as f64 - 1.0 + 2.0 * extra;
    let f = |s: f64| {
        let l = kernel.eval(s * s);
        let lp = if power == 1 { l } else { l.powi(power) };
        if lp == 0.0 {
            0.0
        } else {
            2.0 * s.powf(a) * lp
        }
    };
    let v = match kernel.support() {
        Some(sup) => integrate_adaptive(f, 0.0, sup.sqrt(), RADIAL_TOL),
        None => integrate_semi_infinite(f, 0.0, RADIAL_TOL),
    }
    .map_err(|e| not_admissible("lambda_q(L)", e))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::KernelNotAdmissible(format!("radial moment is {v}")));
    }
    Ok(v)
}

/// `lambda_q(L^power)`.
pub fn lambda_q(kernel: &DirectionalKernel, q: usize, power: i32) -> Result<f64> {
    check_q(q)?;
    let m = radial_moment(kernel, q, power, 0.0)?;
    Ok(2f64.powf(0.5 * q as f64 - 1.0) * omega(q - 1) * m)
}

/// `b_q(L)`.
pub fn b_q(kernel: &DirectionalKernel, q: usize) -> Result<f64> {
    check_q(q)?;
    Ok(radial_moment(kernel, q, 1, 1.0)? / radial_moment(kernel, q, 1, 0.0)?)
}

/// Exact `lambda_{h,q}(L)` at a finite bandwidth.
pub fn lambda_hq(kernel: &DirectionalKernel, q: usize, h: f64) -> Result<f64> {
    check_q(q)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidBandwidth(format!("h must be positive, got {h}")));
    }
    let h2 = h * h;
    let pi = std::f64::consts::PI;
    let upper = match kernel.support() {
        Some(sup) if sup * h2 < 2.0 => (1.0 - sup * h2).acos(),
        _ => pi,
    };
    let e = q as i32 - 1;
    let f = |t: f64| {
        let half = (0.5 * t).sin();
        let r = 2.0 * half * half / h2;
        kernel.eval(r) * t.sin().powi(e)
    };
    // breakpoints resolve the O(h) peak at t = 0
    let mut cuts = vec![0.0];
    for k in [4.0, 12.0, 40.0] {
        let c = k * h;
        if c < upper {
            cuts.push(c);
        }
    }
    cuts.push(upper);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_adaptive(f, w[0], w[1], RADIAL_TOL).map_err(|e| not_admissible("lambda_hq(L)", e))?;
    }
    if !(total > 0.0) {
        return Err(Error::KernelNotAdmissible(format!("lambda_hq is {total} at h = {h}")));
    }
    Ok(omega(q - 1) * total / h.powi(q as i32))
}

/// `int u^k K(u) du`.
pub fn linear_moment(kernel: &LinearKernel, k: i32) -> Result<f64> {
    let f = |u: f64| {
        let v = kernel.eval(u);
        if v == 0.0 {
            0.0
        } else {
            u.powi(k) * v
        }
    };
    match kernel.support() {
        Some(s) => integrate_adaptive(f, -s, s, RADIAL_TOL),
        None => integrate_real_line(f, RADIAL_TOL),
    }
    .map_err(|e| not_admissible("linear kernel moment", e))
}

/// `R(K) = int K^2`.
pub fn linear_roughness(kernel: &LinearKernel) -> Result<f64> {
    let f = |u: f64| kernel.eval(u).powi(2);
    match kernel.support() {
        Some(s) => integrate_adaptive(f, -s, s, RADIAL_TOL),
        None => integrate_real_line(f, RADIAL_TOL),
    }
    .map_err(|e| not_admissible("R(K)", e))
}

/// All constants for `kernel` on `S^q` at directional bandwidth `h`.
pub fn kernel_constants(kernel: &KernelPair, q: usize, h: f64) -> Result<KernelConstants> {
    check_q(q)?;
    let lambda_l = lambda_q(&kernel.directional, q, 1)?;
    let lambda_l2 = lambda_q(&kernel.directional, q, 2)?;
    let lambda_hq = lambda_hq(&kernel.directional, q, h)?;
    let c_hq = 1.0 / (lambda_hq * h.powi(q as i32));
    Ok(KernelConstants {
        q,
        h,
        lambda_l,
        lambda_l2,
        lambda_hq,
        c_hq,
        b_q: b_q(&kernel.directional, q)?,
        mu2_k: linear_moment(&kernel.linear, 2)?,
        r_k: linear_roughness(&kernel.linear)?,
    })
}

/// Directional and linear factors of the ISE variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaFactor {
    pub q: usize,
    /// `gamma_q lambda_q(L)^{-4} int r^{q/2-1} [int rho^{q/2-1} L(rho) phi_q(r, rho) drho]^2 dr`.
    pub directional: f64,
    /// `int [int K(u) K(u + v) du]^2 dv`.
    pub linear: f64,
}

impl SigmaFactor {
    pub fn product(&self) -> f64 {
        self.directional * self.linear
    }
}

/// `gamma_q`: `2^{-1/2}` on the circle, `omega_{q-1} omega_{q-2}^2 2^{3q/2-3}` otherwise.
pub fn gamma_q(q: usize) -> Result<f64> {
    match q {
        0 => Err(Error::UnsupportedDimension(0)),
        1 => Ok(std::f64::consts::FRAC_1_SQRT_2),
        _ => Ok(omega(q - 1) * omega(q - 2).powi(2) * 2f64.powf(1.5 * q as f64 - 3.0)),
    }
}

/// `phi_q(s^2, t^2)`; NaN when the angular quadrature fails, which the
/// enclosing integrator reports.
fn phi_q(kernel: &DirectionalKernel, q: usize, s: f64, t: f64) -> f64 {
    if q == 1 {
        let d = s - t;
        let p = s + t;
        return kernel.eval(d * d) + kernel.eval(p * p);
    }
    let base = s * s + t * t;
    let cross = 2.0 * s * t;
    let e = q as i32 - 2;
    let f = |a: f64| kernel.eval(base - cross * a.cos()) * a.sin().powi(e);
    integrate_adaptive(f, 0.0, std::f64::consts::PI, PHI_TOL).unwrap_or(f64::NAN)
}

pub fn sigma_sq_kernel_factor(kernel: &KernelPair, q: usize) -> Result<SigmaFactor> {
    if !(1..=2).contains(&q) {
        return Err(Error::UnsupportedDimension(q));
    }
    let l = &kernel.directional;
    let top = PHI_TRUNCATION.sqrt();
    let s_top = match l.support() {
        Some(sup) => sup.sqrt().min(top),
        None => top,
    };
    let qi = q as i32;
    let inner = |s: f64| {
        integrate_adaptive(
            |t| {
                let lt = l.eval(t * t);
                if lt == 0.0 {
                    0.0
                } else {
                    2.0 * t.powi(qi - 1) * lt * phi_q(l, q, s, t)
                }
            },
            0.0,
            s_top,
            PHI_TOL,
        )
        .unwrap_or(f64::NAN)
    };
    let outer = integrate_adaptive(
        |s| {
            let v = inner(s);
            2.0 * s.powi(qi - 1) * v * v
        },
        0.0,
        top,
        PHI_TOL,
    )?;
    let lam = lambda_q(l, q, 1)?;
    let directional = gamma_q(q)? * outer / lam.powi(4);
    Ok(SigmaFactor { q, directional, linear: linear_self_convolution_norm(&kernel.linear)? })
}

/// `int [int K(u) K(u + v) du]^2 dv`.
pub fn linear_self_convolution_norm(k: &LinearKernel) -> Result<f64> {
    let tol = AdaptiveOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_segments: 2000 };
    let conv = |v: f64| -> f64 {
        let g = |u: f64| k.eval(u) * k.eval(u + v);
        let r = match k.support() {
            Some(s) => {
                let (a, b) = ((-s).max(-s - v), s.min(s - v));
                if b <= a {
                    Ok(0.0)
                } else {
                    integrate_adaptive(g, a, b, tol)
                }
            }
            None => integrate_real_line(g, tol),
        };
        r.unwrap_or(f64::NAN)
    };
    let half = match k.support() {
        Some(s) => integrate_adaptive(|v| conv(v).powi(2), 0.0, 2.0 * s, tol),
        None => integrate_semi_infinite(|v| conv(v).powi(2), 0.0, tol),
    }
    .map_err(|e| not_admissible("linear convolution norm", e))?;
    Ok(2.0 * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::CustomProfile;
    use std::f64::consts::PI;

    #[test]
    fn von_mises_closed_forms() {
        let k = KernelPair::default();
        for q in 1..=3 {
            let c = kernel_constants(&k, q, 0.5).unwrap();
            let qf = q as f64;
            assert!((c.lambda_l - (2.0 * PI).powf(0.5 * qf)).abs() < 1e-10 * c.lambda_l);
            let ratio = c.lambda_l2 / (c.lambda_l * c.lambda_l);
            assert!((ratio - (2.0 * PI.sqrt()).powf(-qf)).abs() < 1e-12);
            assert!((c.b_q - 0.5 * qf).abs() < 1e-12);
            assert!((c.mu2_k - 1.0).abs() < 1e-12);
            assert!((c.r_k - 0.5 / PI.sqrt()).abs() < 1e-12);
        }
        let c = kernel_constants(&k, 1, 0.5).unwrap();
        assert!((c.lambda_l - 2.50663).abs() < 1e-5);
    }

    #[test]
    fn finite_bandwidth_normalizer_identities() {
        let k = KernelPair::default();
        for q in 1..=3usize {
            let mut prev_gap = f64::INFINITY;
            for &h in &[1.0, 0.5, 0.1, 0.01] {
                let c = kernel_constants(&k, q, h).unwrap();
                assert!((c.c_hq * c.lambda_hq * h.powi(q as i32) - 1.0).abs() < 1e-14);
                let gap = (c.lambda_hq - c.lambda_l).abs() / c.lambda_l;
                assert!(gap <= prev_gap + 1e-13, "q={q} h={h}");
                prev_gap = gap;
            }
            let c = kernel_constants(&k, q, 1e-3).unwrap();
            assert!((c.lambda_hq - c.lambda_l).abs() / c.lambda_l < 1e-4);
        }
    }

    #[test]
    fn divergent_profile_is_not_admissible() {
        let heavy = DirectionalKernel::Custom(CustomProfile::new("cauchy-like", |r: f64| 1.0 / (1.0 + r), None));
        let k = KernelPair { directional: heavy, linear: LinearKernel::Normal };
        assert!(matches!(kernel_constants(&k, 2, 0.5), Err(Error::KernelNotAdmissible(_))));
    }

    #[test]
    fn gamma_constants() {
        assert!((gamma_q(2).unwrap() - 8.0 * PI).abs() < 1e-12);
        assert!((gamma_q(1).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn epanechnikov_constants_are_positive() {
        let k = KernelPair::new(DirectionalKernel::Epanechnikov, LinearKernel::Epanechnikov).unwrap();
        let c = kernel_constants(&k, 1, 0.3).unwrap();
        assert!(c.lambda_l > 0.0 && c.lambda_l2 > 0.0 && c.b_q > 0.0);
        assert!((c.mu2_k - 0.2).abs() < 1e-12);
        assert!((c.r_k - 0.6).abs() < 1e-12);
        // int_0^1 (1-r) r^{-1/2} dr = 4/3, lambda_1 = 2^{-1/2} * 2 * 4/3
        assert!((c.lambda_l - 2f64.sqrt() * 4.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn sigma_factor_q3_unsupported() {
        assert!(matches!(sigma_sq_kernel_factor(&KernelPair::default(), 3), Err(Error::UnsupportedDimension(3))));
    }
}
