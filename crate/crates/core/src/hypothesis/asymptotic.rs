//! Centering and variance of the independence statistic's normal limit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kde::Bandwidths;
use crate::kernel::KernelPair;
use crate::special::constants::{kernel_constants, sigma_sq_kernel_factor};
use crate::special::grid::Support;

/// `n (h^q g)^{1/2} (T_n - A_n) -> N(0, 2 sigma_I^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstants {
    pub a_n: f64,
    pub sigma_i_sq: f64,
    /// `phi(h, g)` when a model is available to evaluate it.
    pub phi: Option<f64>,
    pub n: usize,
    pub h: f64,
    pub g: f64,
    pub q: usize,
}

impl AsymptoticConstants {
    /// `n (h^q g)^{1/2}`.
    pub fn rate(&self) -> f64 {
        self.n as f64 * (self.h.powi(self.q as i32) * self.g).sqrt()
    }

    /// Standardized statistic, asymptotically N(0, 1).
    pub fn standardize(&self, t_n: f64) -> f64 {
        self.rate() * (t_n - self.a_n) / (2.0 * self.sigma_i_sq).sqrt()
    }
}

fn dimension(support: Support) -> usize {
    match support {
        Support::SphereLine => 2,
        _ => 1,
    }
}

/// `A_n` and `sigma_I^2` from the marginal roughnesses `R(f_X)` and `R(f_Z)`
/// (`R(f_Y)` on the torus). The von Mises / normal pair uses closed forms,
/// other kernels go through the radial quadratures.
pub fn asymptotic_constants(
    r_fx: f64,
    r_fz: f64,
    n: usize,
    bw: &Bandwidths,
    support: Support,
    kernel: &KernelPair,
) -> Result<AsymptoticConstants> {
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if !(r_fx > 0.0 && r_fz > 0.0) || !r_fx.is_finite() || !r_fz.is_finite() {
        return Err(Error::Domain(format!("roughness values must be positive, got {r_fx} and {r_fz}")));
    }
    let torus = support == Support::CircleCircle;
    if torus {
        bw.check_dirdir()?;
    } else {
        bw.check_dirlin()?;
    }
    let q = dimension(support);
    let qf = q as f64;
    let nf = n as f64;
    let (h, g) = (bw.h, bw.g);
    let hq = h.powi(q as i32);
    let (a_n, sigma_i_sq) = if torus && kernel.directional.is_von_mises() {
        let c = 2.0 * PI.sqrt();
        (1.0 / (4.0 * PI * nf * h * g) - r_fz / (c * nf * h) - r_fx / (c * nf * g), r_fx * r_fz / (8.0 * PI))
    } else if !torus && kernel.is_closed_form() {
        (
            1.0 / (2f64.powf(qf + 1.0) * PI.powf(0.5 * (qf + 1.0)) * nf * hq * g)
                - r_fz / (2f64.powf(qf) * PI.powf(0.5 * qf) * nf * hq)
                - r_fx / (2.0 * PI.sqrt() * nf * g),
            (8.0 * PI).powf(-0.5 * (qf + 1.0)) * r_fx * r_fz,
        )
    } else if torus {
        let kc = kernel_constants(kernel, 1, h)?;
        let vc = kc.lambda_l2 / (kc.lambda_l * kc.lambda_l);
        let dir = sigma_sq_kernel_factor(kernel, 1)?.directional;
        (vc * vc / (nf * h * g) - vc * r_fz / (nf * h) - vc * r_fx / (nf * g), r_fx * r_fz * dir * dir)
    } else {
        let kc = kernel_constants(kernel, q, h)?;
        let vc = kc.lambda_l2 / (kc.lambda_l * kc.lambda_l);
        let sf = sigma_sq_kernel_factor(kernel, q)?;
        (vc * kc.r_k / (nf * hq * g) - vc * r_fz / (nf * hq) - kc.r_k * r_fx / (nf * g), r_fx * r_fz * sf.product())
    };
    if !a_n.is_finite() || !(sigma_i_sq > 0.0) {
        return Err(Error::Numerical(format!("asymptotic constants not finite (A_n = {a_n}, sigma_I^2 = {sigma_i_sq})")));
    }
    Ok(AsymptoticConstants { a_n, sigma_i_sq, phi: None, n, h, g, q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_circle_line() {
        let r_fx = 0.22634;
        let r_fz = 0.5 / PI.sqrt();
        let bw = Bandwidths::new(0.5, 0.5).unwrap();
        let c = asymptotic_constants(r_fx, r_fz, 100, &bw, Support::CircleLine, &KernelPair::default()).unwrap();
        let expected = 1.0 / (4.0 * PI * 25.0) - r_fz / (2.0 * PI.sqrt() * 50.0) - r_fx / (2.0 * PI.sqrt() * 50.0);
        assert!((c.a_n - expected).abs() < 1e-15);
        assert!((c.a_n - 3.1e-4).abs() < 1e-5);
        assert!((c.sigma_i_sq - r_fx * r_fz / (8.0 * PI)).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bw = Bandwidths::new(0.5, 0.5).unwrap();
        let k = KernelPair::default();
        assert!(asymptotic_constants(0.1, 0.1, 0, &bw, Support::CircleLine, &k).is_err());
        assert!(asymptotic_constants(-0.1, 0.1, 10, &bw, Support::CircleLine, &k).is_err());
    }
}
