//! Joint densities on the cylinder `[0, 2pi) x R` and the torus.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::cdf_table::CdfTable;
use super::circular::{sample_von_mises, vm_log_norm, CircularDensity, CircularFamily};
use super::linear::{LinearDensity, LinearFamily};
use crate::error::{Error, Result};
use crate::special::bessel::bessel_i_scaled;
use crate::special::grid::{GridPoint, QuadratureGrid, SecondFactor, Support};

/// Second factor of a product-type model.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Circular(CircularDensity),
    Linear(LinearDensity),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarginalFamily {
    Circular(CircularFamily),
    Linear(LinearFamily),
}

impl MarginalFamily {
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            MarginalFamily::Circular(f) => f.param_names(),
            MarginalFamily::Linear(f) => f.param_names(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MarginalFamily::Circular(f) => f.name(),
            MarginalFamily::Linear(f) => f.name(),
        }
    }
}

impl Marginal {
    pub fn family(&self) -> MarginalFamily {
        match self {
            Marginal::Circular(d) => MarginalFamily::Circular(d.family()),
            Marginal::Linear(d) => MarginalFamily::Linear(d.family()),
        }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        match self {
            Marginal::Circular(d) => d.pdf(v),
            Marginal::Linear(d) => d.pdf(v),
        }
    }

    pub fn log_pdf(&self, v: f64) -> f64 {
        match self {
            Marginal::Circular(d) => d.log_pdf(v),
            Marginal::Linear(d) => d.log_pdf(v),
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        match self {
            Marginal::Circular(d) => d.cdf(v),
            Marginal::Linear(d) => d.cdf(v),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Marginal::Circular(d) => d.quantile(u),
            Marginal::Linear(d) => d.quantile(u),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Marginal::Circular(d) => d.sample(rng),
            Marginal::Linear(d) => d.sample(rng),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Marginal::Circular(d) => d.params(),
            Marginal::Linear(d) => d.params(),
        }
    }

    pub fn from_params(family: MarginalFamily, p: &[f64]) -> Result<Self> {
        match family {
            MarginalFamily::Circular(f) => CircularDensity::from_params(f, p).map(Marginal::Circular),
            MarginalFamily::Linear(f) => LinearDensity::from_params(f, p).map(Marginal::Linear),
        }
    }

    fn prefix(&self) -> &'static str {
        match self {
            Marginal::Circular(_) => "y",
            Marginal::Linear(_) => "z",
        }
    }

    fn support_with_circle(&self) -> Support {
        match self {
            Marginal::Circular(_) => Support::CircleCircle,
            Marginal::Linear(_) => Support::CircleLine,
        }
    }
}

/// Orientation of the copula link `c(u, v) = 2pi g(2pi (u +- v))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkSign {
    Plus,
    Minus,
}

impl LinkSign {
    pub fn value(&self) -> f64 {
        match self {
            LinkSign::Plus => 1.0,
            LinkSign::Minus => -1.0,
        }
    }
}

/// Von Mises angle with a normal linear part whose mean is linear in
/// `(cos theta, sin theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mardia {
    pub mu: f64,
    pub kappa: f64,
    pub m: f64,
    pub sigma: f64,
    pub rho1: f64,
    pub rho2: f64,
}

impl Mardia {
    pub fn new(mu: f64, kappa: f64, m: f64, sigma: f64, rho1: f64, rho2: f64) -> Result<Self> {
        let s = Self { mu: mu.rem_euclid(TAU), kappa, m, sigma, rho1, rho2 };
        if !(kappa >= 0.0) || !(sigma > 0.0) || !m.is_finite() || !(rho1 * rho1 + rho2 * rho2 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Mardia model needs kappa >= 0, sigma > 0 and rho1^2 + rho2^2 < 1, got {s:?}"
            )));
        }
        Ok(s)
    }

    pub fn conditional_mean(&self, theta: f64) -> f64 {
        self.m
            + self.sigma
                * self.kappa.sqrt()
                * (self.rho1 * (theta.cos() - self.mu.cos()) + self.rho2 * (theta.sin() - self.mu.sin()))
    }

    pub fn conditional_sd(&self) -> f64 {
        self.sigma * (1.0 - self.rho1 * self.rho1 - self.rho2 * self.rho2).sqrt()
    }

    fn log_pdf(&self, theta: f64, z: f64) -> f64 {
        let s = self.conditional_sd();
        let u = (z - self.conditional_mean(theta)) / s;
        self.kappa * ((theta - self.mu).cos() - 1.0) - vm_log_norm(self.kappa) - 0.5 * u * u - s.ln() - 0.5 * TAU.ln()
    }
}

/// Exponential linear part with a von Mises-modulated rate on `z > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpVonMises {
    pub mu: f64,
    pub kappa: f64,
    pub lambda: f64,
}

impl ExpVonMises {
    pub fn new(mu: f64, kappa: f64, lambda: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !(lambda > kappa) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("need 0 <= kappa < lambda, got kappa={kappa}, lambda={lambda}")));
        }
        Ok(Self { mu: mu.rem_euclid(TAU), kappa, lambda })
    }

    /// The angular marginal is wrapped Cauchy with this concentration.
    pub fn marginal_rho(&self) -> f64 {
        if self.kappa == 0.0 {
            0.0
        } else {
            (self.lambda - (self.lambda * self.lambda - self.kappa * self.kappa).sqrt()) / self.kappa
        }
    }

    pub fn rate(&self, theta: f64) -> f64 {
        self.lambda - self.kappa * (theta - self.mu).cos()
    }

    fn log_pdf(&self, theta: f64, z: f64) -> f64 {
        if z <= 0.0 {
            return f64::NEG_INFINITY;
        }
        0.5 * (self.lambda * self.lambda - self.kappa * self.kappa).ln() - TAU.ln() - self.rate(theta) * z
    }
}

/// Copula built from a circular link density.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkCopula {
    pub first: CircularDensity,
    pub second: Marginal,
    pub link: CircularDensity,
    pub sign: LinkSign,
}

impl LinkCopula {
    /// Copula density at `(u, v)` in `[0, 1]^2`.
    pub fn copula(&self, u: f64, v: f64) -> f64 {
        TAU * self.link.pdf(TAU * (u + self.sign.value() * v))
    }
}

/// Quasi-symmetric copula `1 + 2pi alpha cos(2pi u)(1 - 2v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QsCopula {
    pub first: CircularDensity,
    pub second: Marginal,
    pub alpha: f64,
}

pub const QS_ALPHA: f64 = 1.0 / TAU;

impl QsCopula {
    pub fn copula(&self, u: f64, v: f64) -> f64 {
        1.0 + TAU * self.alpha * (TAU * u).cos() * (1.0 - 2.0 * v)
    }

    /// Inverse of the conditional distribution `C(v | u)` at `w`.
    pub fn conditional_quantile(&self, u: f64, w: f64) -> f64 {
        let b = TAU * self.alpha * (TAU * u).cos();
        if b.abs() < 1e-12 {
            return w;
        }
        // root of b v^2 - (1 + b) v + w in [0, 1]
        let disc = ((1.0 + b) * (1.0 + b) - 4.0 * b * w).max(0.0);
        let v = 2.0 * w / ((1.0 + b) + disc.sqrt());
        v.clamp(0.0, 1.0)
    }
}

/// Sine model on the torus.
#[derive(Debug, Clone)]
pub struct SineModel {
    pub mu1: f64,
    pub kappa1: f64,
    pub mu2: f64,
    pub kappa2: f64,
    pub lambda: f64,
    log_norm: f64,
    table: Arc<OnceLock<CdfTable>>,
}

const SINE_NORM_NODES: usize = 256;

impl SineModel {
    pub fn new(mu1: f64, kappa1: f64, mu2: f64, kappa2: f64, lambda: f64) -> Result<Self> {
        if !(kappa1 >= 0.0) || !(kappa2 >= 0.0) || !lambda.is_finite() || !kappa1.is_finite() || !kappa2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sine model needs finite kappa1, kappa2 >= 0 and lambda, got {kappa1}, {kappa2}, {lambda}"
            )));
        }
        let mut s = Self {
            mu1: mu1.rem_euclid(TAU),
            kappa1,
            mu2: mu2.rem_euclid(TAU),
            kappa2,
            lambda,
            log_norm: 0.0,
            table: Arc::new(OnceLock::new()),
        };
        // periodic trapezoid of the theta-marginal is spectrally accurate
        let logs: Vec<f64> = (0..SINE_NORM_NODES)
            .map(|k| s.log_marginal_kernel(k as f64 * TAU / SINE_NORM_NODES as f64))
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
        s.log_norm = top + (sum * TAU / SINE_NORM_NODES as f64).ln();
        Ok(s)
    }

    /// `ln` of the unnormalized angular marginal at `a = theta - mu1`.
    fn log_marginal_kernel(&self, a: f64) -> f64 {
        let r = self.conditional_kappa_at(a);
        self.kappa1 * a.cos() + TAU.ln() + r + bessel_i_scaled(0.0, r).ln()
    }

    fn conditional_kappa_at(&self, a: f64) -> f64 {
        let s = self.lambda * a.sin();
        (self.kappa2 * self.kappa2 + s * s).sqrt()
    }

    /// `(mean, concentration)` of the von Mises law of `psi` given `theta`.
    pub fn conditional(&self, theta: f64) -> (f64, f64) {
        let a = theta - self.mu1;
        let loc = self.mu2 + (self.lambda * a.sin()).atan2(self.kappa2);
        (loc.rem_euclid(TAU), self.conditional_kappa_at(a))
    }

    /// Log normalizing constant, `-ln C`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    pub fn marginal_pdf(&self, theta: f64) -> f64 {
        (self.log_marginal_kernel(theta - self.mu1) - self.log_norm).exp()
    }

    fn table(&self) -> &CdfTable {
        self.table.get_or_init(|| CdfTable::build(|t| self.marginal_pdf(t)))
    }

    fn log_pdf(&self, theta: f64, psi: f64) -> f64 {
        let a = theta - self.mu1;
        let b = psi - self.mu2;
        self.kappa1 * a.cos() + self.kappa2 * b.cos() + self.lambda * a.sin() * b.sin() - self.log_norm
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let theta = self.table().quantile(rng.random::<f64>());
        let (loc, kappa) = self.conditional(theta);
        (theta, sample_von_mises(loc, kappa, rng))
    }
}

impl PartialEq for SineModel {
    fn eq(&self, o: &Self) -> bool {
        (self.mu1, self.kappa1, self.mu2, self.kappa2, self.lambda) == (o.mu1, o.kappa1, o.mu2, o.kappa2, o.lambda)
    }
}

/// Bivariate normal wrapped onto the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrappedNormalTorus {
    pub m1: f64,
    pub m2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
}

/// Standardized distance beyond which wrapped terms are dropped.
const WNT_CUTOFF: f64 = 8.0;

impl WrappedNormalTorus {
    pub fn new(m1: f64, m2: f64, sigma1: f64, sigma2: f64, rho: f64) -> Result<Self> {
        if !(sigma1 > 0.0) || !(sigma2 > 0.0) || !(rho.abs() < 1.0) || !sigma1.is_finite() || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "wrapped normal torus needs sigma > 0 and |rho| < 1, got {sigma1}, {sigma2}, {rho}"
            )));
        }
        Ok(Self { m1: m1.rem_euclid(TAU), m2: m2.rem_euclid(TAU), sigma1, sigma2, rho })
    }

    fn pdf(&self, theta: f64, psi: f64) -> f64 {
        let d1 = (theta - self.m1 + PI).rem_euclid(TAU) - PI;
        let d2 = (psi - self.m2 + PI).rem_euclid(TAU) - PI;
        let one_m = 1.0 - self.rho * self.rho;
        let norm = 1.0 / (TAU * self.sigma1 * self.sigma2 * one_m.sqrt());
        // every omitted term is below exp(-u^2/2) with |u| > WNT_CUTOFF
        let range = |d: f64, s: f64| {
            let r = WNT_CUTOFF * s;
            (((-r - d) / TAU).ceil().min(0.0) as i32, ((r - d) / TAU).floor().max(0.0) as i32)
        };
        let (a1, b1) = range(d1, self.sigma1);
        let (a2, b2) = range(d2, self.sigma2);
        let mut s = 0.0;
        for k1 in a1..=b1 {
            let u = (d1 + TAU * k1 as f64) / self.sigma1;
            for k2 in a2..=b2 {
                let v = (d2 + TAU * k2 as f64) / self.sigma2;
                s += (-(u * u + v * v - 2.0 * self.rho * u * v) / (2.0 * one_m)).exp();
            }
        }
        norm * s
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let c = self.rho * a + (1.0 - self.rho * self.rho).sqrt() * b;
        ((self.m1 + self.sigma1 * a).rem_euclid(TAU), (self.m2 + self.sigma2 * c).rem_euclid(TAU))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Independent { first: CircularDensity, second: Marginal },
    Mardia(Mardia),
    ExpVonMises(ExpVonMises),
    LinkCopula(LinkCopula),
    QsCopula(QsCopula),
    Sine(SineModel),
    WrappedNormalTorus(WrappedNormalTorus),
}

/// Catalog identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Cl(u8),
    Cc(u8),
    Custom,
}

impl ModelId {
    pub const CATALOG_SIZE: u8 = 12;

    pub fn all() -> Vec<ModelId> {
        (1..=Self::CATALOG_SIZE).map(ModelId::Cl).chain((1..=Self::CATALOG_SIZE).map(ModelId::Cc)).collect()
    }

    pub fn support(&self) -> Option<Support> {
        match self {
            ModelId::Cl(_) => Some(Support::CircleLine),
            ModelId::Cc(_) => Some(Support::CircleCircle),
            ModelId::Custom => None,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::Cl(k) => write!(f, "CL{k}"),
            ModelId::Cc(k) => write!(f, "CC{k}"),
            ModelId::Custom => write!(f, "custom"),
        }
    }
}

impl std::str::FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("custom") {
            return Ok(ModelId::Custom);
        }
        let upper = t.to_ascii_uppercase();
        let parse = |rest: &str| rest.parse::<u8>().ok().filter(|k| (1..=Self::CATALOG_SIZE).contains(k));
        let id = if let Some(rest) = upper.strip_prefix("CL") {
            parse(rest).map(ModelId::Cl)
        } else if let Some(rest) = upper.strip_prefix("CC") {
            parse(rest).map(ModelId::Cc)
        } else {
            None
        };
        id.ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// A parametric density on the cylinder or the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    id: ModelId,
    support: Support,
    structure: Structure,
}

fn prefixed(prefix: &str, names: &[&str]) -> Vec<String> {
    names.iter().map(|n| format!("{prefix}.{n}")).collect()
}

impl JointModel {
    pub fn new(id: ModelId, structure: Structure) -> Result<Self> {
        let support = match &structure {
            Structure::Independent { second, .. } => second.support_with_circle(),
            Structure::LinkCopula(c) => c.second.support_with_circle(),
            Structure::QsCopula(c) => c.second.support_with_circle(),
            Structure::Mardia(_) | Structure::ExpVonMises(_) => Support::CircleLine,
            Structure::Sine(_) | Structure::WrappedNormalTorus(_) => Support::CircleCircle,
        };
        if let Some(s) = id.support() {
            if s != support {
                return Err(Error::SupportMismatch {
                    expected: format!("{s} structure for {id}"),
                    found: support.to_string(),
                });
            }
        }
        Ok(Self { id, support, structure })
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn structure_name(&self) -> &'static str {
        match self.structure {
            Structure::Independent { .. } => "independent",
            Structure::Mardia(_) => "mardia",
            Structure::ExpVonMises(_) => "exp-von-mises",
            Structure::LinkCopula(_) => "link-copula",
            Structure::QsCopula(_) => "qs-copula",
            Structure::Sine(_) => "sine",
            Structure::WrappedNormalTorus(_) => "wrapped-normal-torus",
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match &self.structure {
            Structure::Independent { first, second } => {
                let mut v = prefixed("x", first.family().param_names());
                v.extend(prefixed(second.prefix(), second.family().param_names()));
                v
            }
            Structure::Mardia(_) => names(&["mu", "kappa", "m", "sigma", "rho1", "rho2"]),
            Structure::ExpVonMises(_) => names(&["mu", "kappa", "lambda"]),
            Structure::LinkCopula(c) => {
                let mut v = prefixed("x", c.first.family().param_names());
                v.extend(prefixed(c.second.prefix(), c.second.family().param_names()));
                v.extend(prefixed("g", c.link.family().param_names()));
                v
            }
            Structure::QsCopula(c) => {
                let mut v = prefixed("x", c.first.family().param_names());
                v.extend(prefixed(c.second.prefix(), c.second.family().param_names()));
                v.push("alpha".into());
                v
            }
            Structure::Sine(_) => names(&["mu1", "kappa1", "mu2", "kappa2", "lambda"]),
            Structure::WrappedNormalTorus(_) => names(&["m1", "m2", "sigma1", "sigma2", "rho"]),
        }
    }

    /// Flat parameter vector, ordered as `param_names`.
    pub fn theta(&self) -> Vec<f64> {
        match &self.structure {
            Structure::Independent { first, second } => [first.params(), second.params()].concat(),
            Structure::Mardia(s) => vec![s.mu, s.kappa, s.m, s.sigma, s.rho1, s.rho2],
            Structure::ExpVonMises(s) => vec![s.mu, s.kappa, s.lambda],
            Structure::LinkCopula(c) => [c.first.params(), c.second.params(), c.link.params()].concat(),
            Structure::QsCopula(c) => [c.first.params(), c.second.params(), vec![c.alpha]].concat(),
            Structure::Sine(s) => vec![s.mu1, s.kappa1, s.mu2, s.kappa2, s.lambda],
            Structure::WrappedNormalTorus(s) => vec![s.m1, s.m2, s.sigma1, s.sigma2, s.rho],
        }
    }

    /// Same structure and families with a new parameter vector.
    pub fn with_theta(&self, p: &[f64]) -> Result<Self> {
        let need = self.param_names().len();
        if p.len() != need {
            return Err(Error::InvalidParameter(format!("{} expects {need} parameters, got {}", self.id, p.len())));
        }
        let structure = match &self.structure {
            Structure::Independent { first, second } => {
                let k = first.family().param_names().len();
                Structure::Independent {
                    first: CircularDensity::from_params(first.family(), &p[..k])?,
                    second: Marginal::from_params(second.family(), &p[k..])?,
                }
            }
            Structure::Mardia(_) => Structure::Mardia(Mardia::new(p[0], p[1], p[2], p[3], p[4], p[5])?),
            Structure::ExpVonMises(_) => Structure::ExpVonMises(ExpVonMises::new(p[0], p[1], p[2])?),
            Structure::LinkCopula(c) => {
                let k1 = c.first.family().param_names().len();
                let k2 = k1 + c.second.family().param_names().len();
                Structure::LinkCopula(LinkCopula {
                    first: CircularDensity::from_params(c.first.family(), &p[..k1])?,
                    second: Marginal::from_params(c.second.family(), &p[k1..k2])?,
                    link: CircularDensity::from_params(c.link.family(), &p[k2..])?,
                    sign: c.sign,
                })
            }
            Structure::QsCopula(c) => {
                let k1 = c.first.family().param_names().len();
                let k2 = k1 + c.second.family().param_names().len();
                check_qs_alpha(p[k2])?;
                Structure::QsCopula(QsCopula {
                    first: CircularDensity::from_params(c.first.family(), &p[..k1])?,
                    second: Marginal::from_params(c.second.family(), &p[k1..k2])?,
                    alpha: p[k2],
                })
            }
            Structure::Sine(_) => Structure::Sine(SineModel::new(p[0], p[1], p[2], p[3], p[4])?),
            Structure::WrappedNormalTorus(_) => {
                Structure::WrappedNormalTorus(WrappedNormalTorus::new(p[0], p[1], p[2], p[3], p[4])?)
            }
        };
        Ok(Self { id: self.id, support: self.support, structure })
    }

    pub fn params(&self) -> Vec<(String, f64)> {
        self.param_names().into_iter().zip(self.theta()).collect()
    }

    /// Replaces the named parameters; unknown names are rejected.
    pub fn with_overrides<'a, I>(&self, overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let names = self.param_names();
        let mut theta = self.theta();
        for (key, value) in overrides {
            let k = names.iter().position(|n| n == key).ok_or_else(|| {
                Error::InvalidParameter(format!("{} has no parameter `{key}` (known: {})", self.id, names.join(", ")))
            })?;
            theta[k] = value;
        }
        self.with_theta(&theta)
    }

    /// Flat `key=value` text with the model id on the first line.
    pub fn to_text(&self) -> String {
        let mut s = format!("model={}\n", self.id);
        for (k, v) in self.params() {
            s.push_str(&format!("{k}={v:?}\n"));
        }
        s
    }

    /// Density at `(theta, b)` with `b` the linear value or the second angle.
    pub fn pdf(&self, theta: f64, b: f64) -> f64 {
        match &self.structure {
            Structure::Independent { first, second } => first.pdf(theta) * second.pdf(b),
            Structure::LinkCopula(c) => {
                let f2 = c.second.pdf(b);
                if f2 == 0.0 {
                    return 0.0;
                }
                c.copula(c.first.cdf(theta), c.second.cdf(b)) * c.first.pdf(theta) * f2
            }
            Structure::QsCopula(c) => {
                let f2 = c.second.pdf(b);
                if f2 == 0.0 {
                    return 0.0;
                }
                c.copula(c.first.cdf(theta), c.second.cdf(b)) * c.first.pdf(theta) * f2
            }
            Structure::WrappedNormalTorus(s) => s.pdf(theta, b),
            _ => self.log_pdf(theta, b).exp(),
        }
    }

    pub fn log_pdf(&self, theta: f64, b: f64) -> f64 {
        match &self.structure {
            Structure::Independent { first, second } => first.log_pdf(theta) + second.log_pdf(b),
            Structure::Mardia(s) => s.log_pdf(theta, b),
            Structure::ExpVonMises(s) => s.log_pdf(theta, b),
            Structure::Sine(s) => s.log_pdf(theta, b),
            _ => self.pdf(theta, b).ln(),
        }
    }

    pub fn pdf_at(&self, p: &GridPoint<'_>) -> f64 {
        match self.support {
            Support::CircleCircle => self.pdf(p.theta(), p.psi()),
            _ => self.pdf(p.theta(), p.z()),
        }
    }

    /// Density tabulated on `grid` in row-major `(first, second)` order.
    pub fn tabulate(&self, grid: &QuadratureGrid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let theta: Vec<f64> = match grid.first().angles() {
            Some(a) => a.to_vec(),
            None => unreachable!("circle grids carry angles"),
        };
        let second: Vec<f64> = match grid.second() {
            SecondFactor::Line(l) => l.nodes().to_vec(),
            SecondFactor::Directional(d) => d.angles().expect("circle grids carry angles").to_vec(),
        };
        let m = second.len();
        let mut out = vec![0.0; theta.len() * m];
        let outer = |out: &mut Vec<f64>, a: &[f64], b: &[f64], c: &dyn Fn(usize, usize) -> f64| {
            for i in 0..a.len() {
                for j in 0..b.len() {
                    out[i * m + j] = a[i] * b[j] * c(i, j);
                }
            }
        };
        match &self.structure {
            Structure::Independent { first, second: s } => {
                let a: Vec<f64> = theta.iter().map(|&t| first.pdf(t)).collect();
                let b: Vec<f64> = second.iter().map(|&v| s.pdf(v)).collect();
                outer(&mut out, &a, &b, &|_, _| 1.0);
            }
            Structure::LinkCopula(c) => {
                let a: Vec<f64> = theta.iter().map(|&t| c.first.pdf(t)).collect();
                let u: Vec<f64> = theta.iter().map(|&t| c.first.cdf(t)).collect();
                let b: Vec<f64> = second.iter().map(|&v| c.second.pdf(v)).collect();
                let w: Vec<f64> = second.iter().map(|&v| c.second.cdf(v)).collect();
                outer(&mut out, &a, &b, &|i, j| c.copula(u[i], w[j]));
            }
            Structure::QsCopula(c) => {
                let a: Vec<f64> = theta.iter().map(|&t| c.first.pdf(t)).collect();
                let u: Vec<f64> = theta.iter().map(|&t| c.first.cdf(t)).collect();
                let b: Vec<f64> = second.iter().map(|&v| c.second.pdf(v)).collect();
                let w: Vec<f64> = second.iter().map(|&v| c.second.cdf(v)).collect();
                outer(&mut out, &a, &b, &|i, j| c.copula(u[i], w[j]));
            }
            _ => {
                for (i, &t) in theta.iter().enumerate() {
                    for (j, &v) in second.iter().enumerate() {
                        out[i * m + j] = self.pdf(t, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn check_grid(&self, grid: &QuadratureGrid) -> Result<()> {
        if grid.support() != self.support {
            return Err(Error::SupportMismatch { expected: self.support.to_string(), found: grid.support().to_string() });
        }
        Ok(())
    }

    /// Mean and spread of the linear coordinate, used to size line grids.
    pub fn linear_location_scale(&self) -> Option<(f64, f64)> {
        let lin = |m: &Marginal| match m {
            Marginal::Linear(d) => Some((d.mean(), d.sd())),
            Marginal::Circular(_) => None,
        };
        match &self.structure {
            Structure::Independent { second, .. } => lin(second),
            Structure::LinkCopula(c) => lin(&c.second),
            Structure::QsCopula(c) => lin(&c.second),
            Structure::Mardia(s) => Some((s.m, s.sigma)),
            Structure::ExpVonMises(s) => {
                // z | theta is exponential; the largest mean occurs at theta = mu
                let r = s.lambda - s.kappa;
                Some((1.0 / r, 1.0 / r))
            }
            _ => None,
        }
    }

    /// Interval carrying essentially all linear mass.
    pub fn linear_range(&self) -> Option<(f64, f64)> {
        let lin = |m: &Marginal| match m {
            Marginal::Linear(d) => Some(d.effective_range()),
            Marginal::Circular(_) => None,
        };
        match &self.structure {
            Structure::Independent { second, .. } => lin(second),
            Structure::LinkCopula(c) => lin(&c.second),
            Structure::QsCopula(c) => lin(&c.second),
            Structure::Mardia(s) => {
                let spread = s.sigma * s.kappa.sqrt() * (s.rho1.abs() + s.rho2.abs()) * 2.0;
                Some((s.m - spread - 9.0 * s.conditional_sd(), s.m + spread + 9.0 * s.conditional_sd()))
            }
            Structure::ExpVonMises(s) => Some((0.0, 40.0 / (s.lambda - s.kappa))),
            _ => None,
        }
    }

    /// One draw `(theta, b)`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match &self.structure {
            Structure::Independent { first, second } => (first.sample(rng), second.sample(rng)),
            Structure::Mardia(s) => {
                let t = sample_von_mises(s.mu, s.kappa, rng);
                let e: f64 = rng.sample(StandardNormal);
                (t, s.conditional_mean(t) + s.conditional_sd() * e)
            }
            Structure::ExpVonMises(s) => {
                let t = CircularDensity::wrapped_cauchy(s.mu, s.marginal_rho())
                    .expect("admissible wrapped Cauchy")
                    .sample(rng);
                let z = Exp::new(s.rate(t)).expect("positive rate").sample(rng);
                (t, z)
            }
            Structure::LinkCopula(c) => {
                let (u, v) = super::sampling::link_copula_pair(&c.link, c.sign, rng);
                (c.first.quantile(u), c.second.quantile(v))
            }
            Structure::QsCopula(c) => {
                let u: f64 = rng.random();
                let v = c.conditional_quantile(u, rng.random());
                (c.first.quantile(u), c.second.quantile(v))
            }
            Structure::Sine(s) => s.sample(rng),
            Structure::WrappedNormalTorus(s) => s.sample(rng),
        }
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn check_qs_alpha(alpha: f64) -> Result<()> {
    if (alpha - QS_ALPHA).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("QS copula supports only alpha = 1/(2pi), got {alpha}")));
    }
    Ok(())
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: k + 1, message: format!("expected key=value, found `{line}`") })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Inverse of [`JointModel::to_text`] for catalog ids.
pub fn model_from_text(text: &str) -> Result<JointModel> {
    let kv = parse_key_values(text)?;
    let id_text = kv
        .iter()
        .find(|(k, _)| k == "model")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse { line: 1, message: "missing `model` key".into() })?;
    let id: ModelId = id_text.parse()?;
    let mut overrides = Vec::new();
    for (k, v) in kv.iter().filter(|(k, _)| k != "model") {
        let x: f64 = v
            .parse()
            .map_err(|_| Error::Parse { line: 0, message: format!("parameter `{k}` has non-numeric value `{v}`") })?;
        overrides.push((k.as_str(), x));
    }
    super::catalog::make_model(id, &overrides)
}
