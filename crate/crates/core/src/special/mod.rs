//! Special functions, kernel constants and quadrature.

pub mod bessel;
pub mod constants;
pub mod grid;
pub mod quadrature;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_ratio, log_bessel_i, BesselEval};
pub use constants::{kernel_constants, sigma_sq_kernel_factor, KernelConstants, SigmaFactor};
pub use grid::{GridPoint, LineNodes, QuadratureGrid, Support};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Surface area `omega_q = 2 pi^{(q+1)/2} / Gamma((q+1)/2)` of the unit
/// sphere in `R^{q+1}`.
pub fn sphere_area(q: i64) -> Result<f64> {
    if q < 0 {
        return Err(Error::Domain(format!("sphere dimension must be >= 0, got {q}")));
    }
    let a = 0.5 * (q as f64 + 1.0);
    Ok(2.0 * (a * std::f64::consts::PI.ln() - ln_gamma(a)).exp())
}

/// `sphere_area` for dimensions known to be valid.
pub(crate) fn omega(q: usize) -> f64 {
    sphere_area(q as i64).expect("non-negative dimension")
}

/// Squared L2 norm of the von Mises–Fisher density on `S^q`:
/// `kappa^{(q-1)/2} I_{(q-1)/2}(2 kappa) / (2 pi^{(q+1)/2} I_{(q-1)/2}(kappa)^2)`.
pub fn vmf_squared_norm(kappa: f64, q: usize) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("concentration must be >= 0, got {kappa}")));
    }
    if q == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    let nu = 0.5 * (q as f64 - 1.0);
    if kappa == 0.0 {
        return Ok(1.0 / omega(q));
    }
    // scaled values: I(2k) = e^{2k} Is(2k), I(k)^2 = e^{2k} Is(k)^2
    let ratio = bessel_i_scaled(nu, 2.0 * kappa) / bessel_i_scaled(nu, kappa).powi(2);
    let pi_pow = std::f64::consts::PI.powf(0.5 * (q as f64 + 1.0));
    Ok(kappa.powf(nu) * ratio / (2.0 * pi_pow))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(0).unwrap() - 2.0).abs() < 1e-14);
        assert!((sphere_area(1).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(2).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        assert!(matches!(sphere_area(-1), Err(Error::Domain(_))));
    }

    #[test]
    fn vmf_norm_matches_bessel_form() {
        let i0_1 = bessel_i(0.0, 1.0).unwrap().value;
        let i0_2 = bessel_i(0.0, 2.0).unwrap().value;
        let expected = i0_2 / (2.0 * PI * i0_1 * i0_1);
        assert!((vmf_squared_norm(1.0, 1).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.22634).abs() < 1e-5);
        assert!((vmf_squared_norm(0.0, 1).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }
}
