//! Densities on the real line.

use std::f64::consts::{SQRT_2, TAU};

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::erf::{erfc, erf_inv};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use super::cdf_table::BISECTION_STEPS;
use super::circular::{check_weights, pick};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearFamily {
    Normal,
    LogNormal,
    Gamma,
    NormalMixture,
}

impl LinearFamily {
    pub fn name(&self) -> &'static str {
        match self {
            LinearFamily::Normal => "normal",
            LinearFamily::LogNormal => "lognormal",
            LinearFamily::Gamma => "gamma",
            LinearFamily::NormalMixture => "normal-mixture",
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            LinearFamily::Normal | LinearFamily::LogNormal => &["m", "sigma"],
            LinearFamily::Gamma => &["a", "p"],
            LinearFamily::NormalMixture => &["p1", "m1", "sigma1", "p2", "m2", "sigma2"],
        }
    }

    /// True when the support is `(0, inf)`.
    pub fn is_positive(&self) -> bool {
        matches!(self, LinearFamily::LogNormal | LinearFamily::Gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearDensity {
    Normal { m: f64, sigma: f64 },
    LogNormal { m: f64, sigma: f64 },
    /// Rate `a`, shape `p`: `a^p z^{p-1} e^{-az} / Gamma(p)`.
    Gamma { a: f64, p: f64 },
    /// Weights and `(m, sigma)` components.
    NormalMixture { weights: Vec<f64>, components: Vec<(f64, f64)> },
}

const LN_SQRT_TAU: f64 = 0.918_938_533_204_672_8;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

pub fn normal_pdf(z: f64, m: f64, sigma: f64) -> f64 {
    let u = (z - m) / sigma;
    (-0.5 * u * u).exp() / (sigma * TAU.sqrt())
}

pub fn normal_cdf(z: f64, m: f64, sigma: f64) -> f64 {
    0.5 * erfc(-(z - m) / (sigma * SQRT_2))
}

pub fn normal_quantile(u: f64, m: f64, sigma: f64) -> f64 {
    m + sigma * SQRT_2 * erf_inv(2.0 * u - 1.0)
}

impl LinearDensity {
    pub fn normal(m: f64, sigma: f64) -> Result<Self> {
        check_finite("m", m)?;
        check_positive("sigma", sigma)?;
        Ok(LinearDensity::Normal { m, sigma })
    }

    pub fn lognormal(m: f64, sigma: f64) -> Result<Self> {
        check_finite("m", m)?;
        check_positive("sigma", sigma)?;
        Ok(LinearDensity::LogNormal { m, sigma })
    }

    pub fn gamma(a: f64, p: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("p", p)?;
        Ok(LinearDensity::Gamma { a, p })
    }

    pub fn normal_mixture(weights: Vec<f64>, components: Vec<(f64, f64)>) -> Result<Self> {
        check_weights(&weights, components.len())?;
        for &(m, s) in &components {
            check_finite("m", m)?;
            check_positive("sigma", s)?;
        }
        Ok(LinearDensity::NormalMixture { weights, components })
    }

    pub fn family(&self) -> LinearFamily {
        match self {
            LinearDensity::Normal { .. } => LinearFamily::Normal,
            LinearDensity::LogNormal { .. } => LinearFamily::LogNormal,
            LinearDensity::Gamma { .. } => LinearFamily::Gamma,
            LinearDensity::NormalMixture { .. } => LinearFamily::NormalMixture,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            LinearDensity::Normal { m, sigma } | LinearDensity::LogNormal { m, sigma } => vec![*m, *sigma],
            LinearDensity::Gamma { a, p } => vec![*a, *p],
            LinearDensity::NormalMixture { weights, components } => weights
                .iter()
                .zip(components)
                .flat_map(|(&w, &(m, s))| [w, m, s])
                .collect(),
        }
    }

    pub fn from_params(family: LinearFamily, p: &[f64]) -> Result<Self> {
        let need = family.param_names().len();
        if p.len() != need {
            return Err(Error::InvalidParameter(format!(
                "{} expects {need} parameters, got {}",
                family.name(),
                p.len()
            )));
        }
        match family {
            LinearFamily::Normal => Self::normal(p[0], p[1]),
            LinearFamily::LogNormal => Self::lognormal(p[0], p[1]),
            LinearFamily::Gamma => Self::gamma(p[0], p[1]),
            LinearFamily::NormalMixture => Self::normal_mixture(vec![p[0], p[3]], vec![(p[1], p[2]), (p[4], p[5])]),
        }
    }

    pub fn pdf(&self, z: f64) -> f64 {
        match self {
            LinearDensity::Normal { m, sigma } => normal_pdf(z, *m, *sigma),
            LinearDensity::NormalMixture { weights, components } => {
                weights.iter().zip(components).map(|(&w, &(m, s))| w * normal_pdf(z, m, s)).sum()
            }
            _ => {
                if z <= 0.0 {
                    0.0
                } else {
                    self.log_pdf(z).exp()
                }
            }
        }
    }

    pub fn log_pdf(&self, z: f64) -> f64 {
        match self {
            LinearDensity::Normal { m, sigma } => {
                let u = (z - m) / sigma;
                -0.5 * u * u - sigma.ln() - LN_SQRT_TAU
            }
            LinearDensity::LogNormal { m, sigma } => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lz = z.ln();
                let u = (lz - m) / sigma;
                -0.5 * u * u - sigma.ln() - LN_SQRT_TAU - lz
            }
            LinearDensity::Gamma { a, p } => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                p * a.ln() + (p - 1.0) * z.ln() - a * z - ln_gamma(*p)
            }
            LinearDensity::NormalMixture { .. } => self.pdf(z).ln(),
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match self {
            LinearDensity::Normal { m, sigma } => normal_cdf(z, *m, *sigma),
            LinearDensity::LogNormal { m, sigma } => {
                if z <= 0.0 {
                    0.0
                } else {
                    normal_cdf(z.ln(), *m, *sigma)
                }
            }
            LinearDensity::Gamma { a, p } => {
                if z <= 0.0 {
                    0.0
                } else {
                    gamma_lr(*p, a * z)
                }
            }
            LinearDensity::NormalMixture { weights, components } => {
                weights.iter().zip(components).map(|(&w, &(m, s))| w * normal_cdf(z, m, s)).sum()
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            LinearDensity::Normal { m, sigma } => normal_quantile(u, *m, *sigma),
            LinearDensity::LogNormal { m, sigma } => normal_quantile(u, *m, *sigma).exp(),
            _ => {
                let (mean, sd) = (self.mean(), self.sd());
                let (mut lo, mut hi) = (mean - 10.0 * sd, mean + 10.0 * sd);
                if self.family().is_positive() {
                    lo = 0.0;
                }
                while self.cdf(lo) > u {
                    lo -= 10.0 * sd;
                }
                while self.cdf(hi) < u {
                    hi += 10.0 * sd;
                }
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            LinearDensity::Normal { m, .. } => *m,
            LinearDensity::LogNormal { m, sigma } => (m + 0.5 * sigma * sigma).exp(),
            LinearDensity::Gamma { a, p } => p / a,
            LinearDensity::NormalMixture { weights, components } => {
                weights.iter().zip(components).map(|(&w, &(m, _))| w * m).sum()
            }
        }
    }

    pub fn sd(&self) -> f64 {
        match self {
            LinearDensity::Normal { sigma, .. } => *sigma,
            LinearDensity::LogNormal { m, sigma } => {
                let s2 = sigma * sigma;
                ((s2.exp() - 1.0) * (2.0 * m + s2).exp()).sqrt()
            }
            LinearDensity::Gamma { a, p } => p.sqrt() / a,
            LinearDensity::NormalMixture { weights, components } => {
                let mean = self.mean();
                weights
                    .iter()
                    .zip(components)
                    .map(|(&w, &(m, s))| w * (s * s + (m - mean) * (m - mean)))
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Interval carrying all but a negligible amount of mass.
    pub fn effective_range(&self) -> (f64, f64) {
        match self {
            LinearDensity::Normal { m, sigma } => (m - 9.0 * sigma, m + 9.0 * sigma),
            LinearDensity::NormalMixture { components, .. } => components
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(m, s)| (lo.min(m - 9.0 * s), hi.max(m + 9.0 * s))),
            _ => (0.0, self.quantile(1.0 - 1e-12)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LinearDensity::Normal { m, sigma } => m + sigma * rng.sample::<f64, _>(StandardNormal),
            LinearDensity::LogNormal { m, sigma } => (m + sigma * rng.sample::<f64, _>(StandardNormal)).exp(),
            LinearDensity::Gamma { a, p } => Gamma::new(*p, 1.0 / a).expect("positive parameters").sample(rng),
            LinearDensity::NormalMixture { weights, components } => {
                let (m, s) = components[pick(weights, rng.random::<f64>())];
                m + s * rng.sample::<f64, _>(StandardNormal)
            }
        }
    }
}
