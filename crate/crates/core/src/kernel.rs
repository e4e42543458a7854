//! Directional and linear kernels.
//!
//! A directional kernel is a profile `L: [0, inf) -> [0, inf)` applied to
//! `(1 - x'y) / h^2`; the von Mises profile `L(r) = exp(-r)` turns the
//! directional estimator into a mixture of von Mises–Fisher densities. A
//! linear kernel is a symmetric density `K` on the real line.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::special::bessel::bessel_i_scaled;
use crate::special::constants::lambda_hq;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied kernel profile. `support` is the right end of the
/// profile's support when it is compact.
#[derive(Clone)]
pub struct CustomProfile {
    name: String,
    f: Profile,
    support: Option<f64>,
}

impl CustomProfile {
    pub fn new<F>(name: impl Into<String>, f: F, support: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), f: Arc::new(f), support }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProfile").field("name", &self.name).field("support", &self.support).finish()
    }
}

impl PartialEq for CustomProfile {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.support == other.support && Arc::ptr_eq(&self.f, &other.f)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum DirectionalKernel {
    /// `L(r) = exp(-r)`.
    #[default]
    VonMises,
    /// `L(r) = (1 - r) 1{r < 1}`.
    Epanechnikov,
    Custom(CustomProfile),
}

impl DirectionalKernel {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            DirectionalKernel::VonMises => (-r).exp(),
            DirectionalKernel::Epanechnikov => {
                if r < 1.0 {
                    1.0 - r
                } else {
                    0.0
                }
            }
            DirectionalKernel::Custom(c) => (c.f)(r),
        }
    }

    /// Right end of the profile's support, if compact.
    pub fn support(&self) -> Option<f64> {
        match self {
            DirectionalKernel::VonMises => None,
            DirectionalKernel::Epanechnikov => Some(1.0),
            DirectionalKernel::Custom(c) => c.support,
        }
    }

    pub fn is_von_mises(&self) -> bool {
        matches!(self, DirectionalKernel::VonMises)
    }

    pub fn name(&self) -> &str {
        match self {
            DirectionalKernel::VonMises => "von-mises",
            DirectionalKernel::Epanechnikov => "epanechnikov",
            DirectionalKernel::Custom(c) => &c.name,
        }
    }

    /// `ln c_{h,q}(L)`. Closed form for the von Mises profile, where
    /// `c_{h,q}(L) = C_q(1/h^2) e^{1/h^2}`; quadrature otherwise.
    pub fn log_normalizer(&self, q: usize, h: f64) -> Result<f64> {
        if q == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidBandwidth(format!("h must be positive, got {h}")));
        }
        if self.is_von_mises() {
            let kappa = 1.0 / (h * h);
            let qf = q as f64;
            let nu = 0.5 * (qf - 1.0);
            return Ok(nu * kappa.ln() - 0.5 * (qf + 1.0) * (2.0 * PI).ln() - bessel_i_scaled(nu, kappa).ln());
        }
        let lam = lambda_hq(self, q, h)?;
        Ok(-(lam.ln() + q as f64 * h.ln()))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum LinearKernel {
    /// Standard normal density.
    #[default]
    Normal,
    /// `3/4 (1 - u^2)` on `[-1, 1]`.
    Epanechnikov,
    Custom(CustomProfile),
}

impl LinearKernel {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            LinearKernel::Normal => (-0.5 * u * u).exp() / (2.0 * PI).sqrt(),
            LinearKernel::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            LinearKernel::Custom(c) => (c.f)(u),
        }
    }

    /// Half-width of the support, if compact.
    pub fn support(&self) -> Option<f64> {
        match self {
            LinearKernel::Normal => None,
            LinearKernel::Epanechnikov => Some(1.0),
            LinearKernel::Custom(c) => c.support,
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, LinearKernel::Normal)
    }

    pub fn name(&self) -> &str {
        match self {
            LinearKernel::Normal => "normal",
            LinearKernel::Epanechnikov => "epanechnikov",
            LinearKernel::Custom(c) => &c.name,
        }
    }
}

/// The product kernel `LK` used by the directional-linear estimator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelPair {
    pub directional: DirectionalKernel,
    pub linear: LinearKernel,
}

impl KernelPair {
    /// Builds a pair after checking the admissibility conditions: `L`
    /// nonnegative and nonincreasing, `K` symmetric and of unit mass.
    pub fn new(directional: DirectionalKernel, linear: LinearKernel) -> Result<Self> {
        let pair = Self { directional, linear };
        pair.validate()?;
        Ok(pair)
    }

    pub fn von_mises_normal() -> Self {
        Self::default()
    }

    /// True for the von Mises / normal pair, the only one with closed-form
    /// asymptotic constants.
    pub fn is_closed_form(&self) -> bool {
        self.directional.is_von_mises() && self.linear.is_normal()
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev = f64::INFINITY;
        for k in 0..=2000 {
            let r = k as f64 * 0.025;
            let v = self.directional.eval(r);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::KernelNotAdmissible(format!("L({r}) = {v} is not a finite nonnegative value")));
            }
            if v > prev * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::KernelNotAdmissible(format!("L is increasing near r = {r}")));
            }
            prev = v;
        }
        for k in 0..=400 {
            let u = k as f64 * 0.025;
            let (a, b) = (self.linear.eval(u), self.linear.eval(-u));
            if !(a >= 0.0) || (a - b).abs() > 1e-12 * a.abs().max(1e-300) {
                return Err(Error::KernelNotAdmissible(format!("K is not a symmetric nonnegative density at u = {u}")));
            }
        }
        let mass = crate::special::constants::linear_moment(&self.linear, 0)?;
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::KernelNotAdmissible(format!("K integrates to {mass}, not 1")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_pair_is_admissible() {
        let k = KernelPair::default();
        assert!(k.validate().is_ok());
        assert!(k.is_closed_form());
        assert!(KernelPair::new(DirectionalKernel::Epanechnikov, LinearKernel::Epanechnikov).is_ok());
    }

    #[test]
    fn increasing_profile_is_rejected() {
        let bad = DirectionalKernel::Custom(CustomProfile::new("ramp", |r: f64| r.min(1.0), None));
        assert!(matches!(KernelPair::new(bad, LinearKernel::Normal), Err(Error::KernelNotAdmissible(_))));
        let skew = LinearKernel::Custom(CustomProfile::new("skew", |u: f64| if u > 0.0 { (-u).exp() } else { 0.0 }, None));
        assert!(KernelPair::new(DirectionalKernel::VonMises, skew).is_err());
    }

    #[test]
    fn von_mises_normalizer_matches_quadrature() {
        for q in 1..=3 {
            for &h in &[1.0, 0.5, 0.2, 0.05] {
                let closed = DirectionalKernel::VonMises.log_normalizer(q, h).unwrap();
                let lam = lambda_hq(&DirectionalKernel::VonMises, q, h).unwrap();
                let numeric = -(lam.ln() + q as f64 * h.ln());
                assert!((closed - numeric).abs() < 1e-10, "q={q} h={h}: {closed} vs {numeric}");
            }
        }
    }
}
