//! Circular densities on `[0, 2pi)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};

use super::cdf_table::{invert_circular_cdf, reduce, CdfTable};
use crate::error::{Error, Result};
use crate::special::bessel::bessel_i_scaled;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircularFamily {
    Uniform,
    VonMises,
    Cardioid,
    WrappedCauchy,
    WrappedNormal,
    VmMixture,
}

impl CircularFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CircularFamily::Uniform => "uniform",
            CircularFamily::VonMises => "von-mises",
            CircularFamily::Cardioid => "cardioid",
            CircularFamily::WrappedCauchy => "wrapped-cauchy",
            CircularFamily::WrappedNormal => "wrapped-normal",
            CircularFamily::VmMixture => "vm-mixture",
        }
    }

    /// Parameter names in layout order; mixtures have two components.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            CircularFamily::Uniform => &[],
            CircularFamily::VonMises => &["mu", "kappa"],
            CircularFamily::Cardioid | CircularFamily::WrappedCauchy => &["mu", "rho"],
            CircularFamily::WrappedNormal => &["mu", "sigma"],
            CircularFamily::VmMixture => &["p1", "mu1", "kappa1", "p2", "mu2", "kappa2"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircularKind {
    Uniform,
    VonMises { mu: f64, kappa: f64 },
    Cardioid { mu: f64, rho: f64 },
    WrappedCauchy { mu: f64, rho: f64 },
    WrappedNormal { mu: f64, sigma: f64 },
    /// Weights and `(mu, kappa)` components.
    VmMixture { weights: Vec<f64>, components: Vec<(f64, f64)> },
}

/// A circular density with a lazily built cumulative table.
#[derive(Clone)]
pub struct CircularDensity {
    kind: CircularKind,
    /// `ln(2 pi I_0(kappa)) - kappa` per von Mises component.
    log_norms: Vec<f64>,
    table: Arc<OnceLock<CdfTable>>,
}

impl fmt::Debug for CircularDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl PartialEq for CircularDensity {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// Wrap count `P = ceil(6 sigma / 2pi) + 1` for wrapped normal series.
pub fn wrap_count(sigma: f64) -> i32 {
    (6.0 * sigma / TAU).ceil() as i32 + 1
}

/// `ln(2 pi I_0(kappa)) - kappa`, the log normalizer of `exp(kappa (cos - 1))`.
pub(crate) fn vm_log_norm(kappa: f64) -> f64 {
    TAU.ln() + bessel_i_scaled(0.0, kappa).ln()
}

impl CircularDensity {
    pub fn new(kind: CircularKind) -> Result<Self> {
        let log_norms = match &kind {
            CircularKind::Uniform => vec![],
            CircularKind::VonMises { mu, kappa } => {
                check_angle(*mu)?;
                check_kappa(*kappa)?;
                vec![vm_log_norm(*kappa)]
            }
            CircularKind::Cardioid { mu, rho } => {
                check_angle(*mu)?;
                if !(rho.abs() <= 0.5) {
                    return Err(Error::InvalidParameter(format!("cardioid needs |rho| <= 1/2, got {rho}")));
                }
                vec![]
            }
            CircularKind::WrappedCauchy { mu, rho } => {
                check_angle(*mu)?;
                if !(0.0..1.0).contains(rho) {
                    return Err(Error::InvalidParameter(format!("wrapped Cauchy needs 0 <= rho < 1, got {rho}")));
                }
                vec![]
            }
            CircularKind::WrappedNormal { mu, sigma } => {
                check_angle(*mu)?;
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidParameter(format!("wrapped normal needs sigma > 0, got {sigma}")));
                }
                vec![]
            }
            CircularKind::VmMixture { weights, components } => {
                check_weights(weights, components.len())?;
                let mut v = Vec::with_capacity(components.len());
                for &(mu, kappa) in components {
                    check_angle(mu)?;
                    check_kappa(kappa)?;
                    v.push(vm_log_norm(kappa));
                }
                v
            }
        };
        Ok(Self { kind, log_norms, table: Arc::new(OnceLock::new()) })
    }

    pub fn uniform() -> Self {
        Self::new(CircularKind::Uniform).expect("uniform is always valid")
    }

    pub fn von_mises(mu: f64, kappa: f64) -> Result<Self> {
        Self::new(CircularKind::VonMises { mu, kappa })
    }

    pub fn cardioid(mu: f64, rho: f64) -> Result<Self> {
        Self::new(CircularKind::Cardioid { mu, rho })
    }

    pub fn wrapped_cauchy(mu: f64, rho: f64) -> Result<Self> {
        Self::new(CircularKind::WrappedCauchy { mu, rho })
    }

    pub fn wrapped_normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(CircularKind::WrappedNormal { mu, sigma })
    }

    pub fn vm_mixture(weights: Vec<f64>, components: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(CircularKind::VmMixture { weights, components })
    }

    pub fn kind(&self) -> &CircularKind {
        &self.kind
    }

    pub fn family(&self) -> CircularFamily {
        match self.kind {
            CircularKind::Uniform => CircularFamily::Uniform,
            CircularKind::VonMises { .. } => CircularFamily::VonMises,
            CircularKind::Cardioid { .. } => CircularFamily::Cardioid,
            CircularKind::WrappedCauchy { .. } => CircularFamily::WrappedCauchy,
            CircularKind::WrappedNormal { .. } => CircularFamily::WrappedNormal,
            CircularKind::VmMixture { .. } => CircularFamily::VmMixture,
        }
    }

    /// Flat parameter vector in the family's layout.
    pub fn params(&self) -> Vec<f64> {
        match &self.kind {
            CircularKind::Uniform => vec![],
            CircularKind::VonMises { mu, kappa } => vec![*mu, *kappa],
            CircularKind::Cardioid { mu, rho } | CircularKind::WrappedCauchy { mu, rho } => vec![*mu, *rho],
            CircularKind::WrappedNormal { mu, sigma } => vec![*mu, *sigma],
            CircularKind::VmMixture { weights, components } => weights
                .iter()
                .zip(components)
                .flat_map(|(&w, &(m, k))| [w, m, k])
                .collect(),
        }
    }

    /// Rebuilds a density of `family` from a flat parameter vector.
    pub fn from_params(family: CircularFamily, p: &[f64]) -> Result<Self> {
        let need = family.param_names().len();
        if p.len() != need {
            return Err(Error::InvalidParameter(format!(
                "{} expects {need} parameters, got {}",
                family.name(),
                p.len()
            )));
        }
        let mu = |x: f64| x.rem_euclid(TAU);
        match family {
            CircularFamily::Uniform => Ok(Self::uniform()),
            CircularFamily::VonMises => Self::von_mises(mu(p[0]), p[1]),
            CircularFamily::Cardioid => Self::cardioid(mu(p[0]), p[1]),
            CircularFamily::WrappedCauchy => Self::wrapped_cauchy(mu(p[0]), p[1]),
            CircularFamily::WrappedNormal => Self::wrapped_normal(mu(p[0]), p[1]),
            CircularFamily::VmMixture => Self::vm_mixture(
                vec![p[0], p[3]],
                vec![(mu(p[1]), p[2]), (mu(p[4]), p[5])],
            ),
        }
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        match &self.kind {
            CircularKind::Uniform => 1.0 / TAU,
            CircularKind::VonMises { mu, kappa } => (kappa * ((theta - mu).cos() - 1.0) - self.log_norms[0]).exp(),
            CircularKind::Cardioid { mu, rho } => (1.0 + 2.0 * rho * (theta - mu).cos()) / TAU,
            CircularKind::WrappedCauchy { mu, rho } => {
                (1.0 - rho * rho) / (TAU * (1.0 + rho * rho - 2.0 * rho * (theta - mu).cos()))
            }
            CircularKind::WrappedNormal { mu, sigma } => wrapped_normal_pdf(theta, *mu, *sigma),
            CircularKind::VmMixture { weights, components } => weights
                .iter()
                .zip(components)
                .zip(&self.log_norms)
                .map(|((&w, &(m, k)), &ln)| w * (k * ((theta - m).cos() - 1.0) - ln).exp())
                .sum(),
        }
    }

    pub fn log_pdf(&self, theta: f64) -> f64 {
        match &self.kind {
            CircularKind::VonMises { mu, kappa } => kappa * ((theta - mu).cos() - 1.0) - self.log_norms[0],
            _ => self.pdf(theta).ln(),
        }
    }

    fn table(&self) -> &CdfTable {
        self.table.get_or_init(|| CdfTable::build(|t| self.pdf(t)))
    }

    /// Distribution function from 0; angles outside `[0, 2pi]` are reduced
    /// mod `2pi`.
    pub fn cdf(&self, theta: f64) -> f64 {
        let t = reduce(theta);
        match &self.kind {
            CircularKind::Uniform => t / TAU,
            CircularKind::Cardioid { mu, rho } => cardioid_cdf(t, *mu, *rho),
            _ => self.table().cdf(t),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match &self.kind {
            CircularKind::Uniform => u.clamp(0.0, 1.0) * TAU,
            CircularKind::Cardioid { mu, rho } => invert_circular_cdf(|t| cardioid_cdf(t, *mu, *rho), u),
            _ => self.table().quantile(u),
        }
    }

    /// Mean resultant length `E cos(Theta - mu)` of the distribution (for
    /// unimodal families).
    pub fn resultant_length(&self) -> f64 {
        match &self.kind {
            CircularKind::Uniform => 0.0,
            CircularKind::VonMises { kappa, .. } => crate::special::bessel_ratio(0.0, *kappa),
            CircularKind::Cardioid { rho, .. } => *rho,
            CircularKind::WrappedCauchy { rho, .. } => *rho,
            CircularKind::WrappedNormal { sigma, .. } => (-0.5 * sigma * sigma).exp(),
            CircularKind::VmMixture { .. } => {
                let (c, s) = self.trig_moment();
                c.hypot(s)
            }
        }
    }

    fn trig_moment(&self) -> (f64, f64) {
        match &self.kind {
            CircularKind::VmMixture { weights, components } => {
                weights.iter().zip(components).fold((0.0, 0.0), |(c, s), (&w, &(m, k))| {
                    let r = crate::special::bessel_ratio(0.0, k);
                    (c + w * r * m.cos(), s + w * r * m.sin())
                })
            }
            _ => (0.0, 0.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            CircularKind::Uniform => rng.random::<f64>() * TAU,
            CircularKind::VonMises { mu, kappa } => sample_von_mises(*mu, *kappa, rng),
            CircularKind::Cardioid { .. } => self.quantile(rng.random::<f64>()),
            CircularKind::WrappedCauchy { mu, rho } => {
                if *rho == 0.0 {
                    return rng.random::<f64>() * TAU;
                }
                let c = Cauchy::new(*mu, -rho.ln()).expect("positive scale");
                c.sample(rng).rem_euclid(TAU)
            }
            CircularKind::WrappedNormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).rem_euclid(TAU)
            }
            CircularKind::VmMixture { weights, components } => {
                let k = pick(weights, rng.random::<f64>());
                let (m, kappa) = components[k];
                sample_von_mises(m, kappa, rng)
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

pub(crate) fn pick(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.len() - 1
}

fn check_angle(mu: f64) -> Result<()> {
    if mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("location must be finite, got {mu}")))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("concentration must be finite and >= 0, got {kappa}")))
    }
}

pub(crate) fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n || n == 0 {
        return Err(Error::InvalidParameter(format!("{} weights for {n} components", weights.len())));
    }
    if weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("mixture weights {weights:?} must be in [0,1] and sum to 1")));
    }
    Ok(())
}

pub fn cardioid_cdf(theta: f64, mu: f64, rho: f64) -> f64 {
    (theta + 2.0 * rho * ((theta - mu).sin() + mu.sin())) / TAU
}

pub fn wrapped_normal_pdf(theta: f64, mu: f64, sigma: f64) -> f64 {
    let p = wrap_count(sigma);
    let d = (theta - mu).rem_euclid(TAU);
    let inv = 1.0 / sigma;
    let mut s = 0.0;
    for k in -p..=p {
        let x = (d + TAU * k as f64) * inv;
        s += (-0.5 * x * x).exp();
    }
    s * inv / (TAU.sqrt())
}

/// Von Mises draw by Wood's rejection scheme specialized to the circle.
pub fn sample_von_mises<R: Rng + ?Sized>(mu: f64, kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-12 {
        return rng.random::<f64>() * TAU;
    }
    let w = wood_cosine(kappa, 1.0, rng);
    let angle = w.clamp(-1.0, 1.0).acos();
    let signed = if rng.random::<bool>() { angle } else { -angle };
    (mu + signed).rem_euclid(TAU)
}

/// Draws `W = x'mu` for a von Mises–Fisher vector on `S^{p-1}` with
/// `m = p - 1` (Wood 1994).
pub(crate) fn wood_cosine<R: Rng + ?Sized>(kappa: f64, m: f64, rng: &mut R) -> f64 {
    let b = m / (2.0 * kappa + (4.0 * kappa * kappa + m * m).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + m * (1.0 - x0 * x0).ln();
    let half = 0.5 * m;
    loop {
        let z = if m == 1.0 {
            // Beta(1/2, 1/2) is the arcsine law
            let s = (0.5 * PI * rng.random::<f64>()).sin();
            s * s
        } else {
            let beta = rand_distr::Beta::new(half, half).expect("positive shape");
            beta.sample(rng)
        };
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = rng.random();
        if kappa * w + m * (1.0 - x0 * w).ln() - c >= u.ln() {
            return w;
        }
    }
}

/// Von Mises–Fisher draw on `S^{p-1}` around the unit vector `mu`.
pub fn sample_von_mises_fisher<R: Rng + ?Sized>(mu: &[f64], kappa: f64, rng: &mut R) -> Vec<f64> {
    let p = mu.len();
    let w = if kappa < 1e-12 { 2.0 * rng.random::<f64>() - 1.0 } else { wood_cosine(kappa, (p - 1) as f64, rng) };
    if kappa < 1e-12 && p != 3 {
        // uniform on the sphere by normalizing a Gaussian vector
        let mut v: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= n);
        return v;
    }
    // uniform tangent direction orthogonal to mu
    let mut v: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let proj: f64 = v.iter().zip(mu).map(|(a, b)| a * b).sum();
    v.iter_mut().zip(mu).for_each(|(a, b)| *a -= proj * b);
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let s = (1.0 - w * w).max(0.0).sqrt();
    mu.iter().zip(&v).map(|(m, t)| w * m + s * t / n).collect()
}
