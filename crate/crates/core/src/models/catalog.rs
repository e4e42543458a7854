//! The circular-linear (CL1–CL12) and circular-circular (CC1–CC12)
//! catalogs, deviation densities and mixture alternatives.

use std::f64::consts::PI;

use rand::Rng;

use super::circular::CircularDensity;
use super::joint::{
    ExpVonMises, JointModel, LinkCopula, LinkSign, Mardia, Marginal, ModelId, QsCopula, SineModel, Structure,
    WrappedNormalTorus, QS_ALPHA,
};
use super::linear::LinearDensity;
use super::sampling::JointSample;
use crate::error::{Error, Result};
use crate::special::grid::{GridPoint, QuadratureGrid, Support};

fn vm(mu: f64, kappa: f64) -> CircularDensity {
    CircularDensity::von_mises(mu, kappa).expect("catalog parameters are admissible")
}

fn vm2(p: f64, a: (f64, f64), b: (f64, f64)) -> CircularDensity {
    CircularDensity::vm_mixture(vec![p, 1.0 - p], vec![a, b]).expect("catalog parameters are admissible")
}

fn lin(d: Result<LinearDensity>) -> Marginal {
    Marginal::Linear(d.expect("catalog parameters are admissible"))
}

fn circ(d: Result<CircularDensity>) -> Marginal {
    Marginal::Circular(d.expect("catalog parameters are admissible"))
}

fn default_structure(id: ModelId) -> Result<Structure> {
    let s = match id {
        ModelId::Cl(1) => Structure::Independent { first: vm(1.5 * PI, 2.0), second: lin(LinearDensity::normal(0.0, 1.0)) },
        ModelId::Cl(2) => Structure::Independent {
            first: CircularDensity::wrapped_cauchy(1.5 * PI, 0.75)?,
            second: lin(LinearDensity::lognormal(0.5, 0.75)),
        },
        ModelId::Cl(3) => Structure::Independent {
            first: vm2(0.5, (PI / 4.0, 2.0), (1.25 * PI, 2.0)),
            second: lin(LinearDensity::gamma(1.0 / 3.0, 3.0)),
        },
        ModelId::Cl(4) => Structure::Independent {
            first: CircularDensity::wrapped_normal(1.5 * PI, 1.0)?,
            second: lin(LinearDensity::normal_mixture(vec![0.5, 0.5], vec![(0.0, 0.25), (2.0, 1.0)])),
        },
        ModelId::Cl(5) => Structure::Independent {
            first: vm2(0.5, (1.25 * PI, 10.0), (1.75 * PI, 3.0)),
            second: lin(LinearDensity::normal_mixture(vec![0.75, 0.25], vec![(-1.0, 1.0), (2.0, 0.5)])),
        },
        ModelId::Cl(6) => Structure::Mardia(Mardia::new(1.5 * PI, 1.0, 0.0, 0.5, 0.5, 0.5)?),
        ModelId::Cl(7) => Structure::Mardia(Mardia::new(1.5 * PI, 5.0, 0.0, 1.5, 0.5, -0.75)?),
        ModelId::Cl(8) => Structure::LinkCopula(LinkCopula {
            first: CircularDensity::uniform(),
            second: lin(LinearDensity::normal(0.0, 1.0)),
            link: vm(1.25 * PI, 1.5),
            sign: LinkSign::Plus,
        }),
        ModelId::Cl(9) => Structure::LinkCopula(LinkCopula {
            first: CircularDensity::uniform(),
            second: lin(LinearDensity::normal(0.0, 0.5)),
            link: vm2(0.5, (PI / 4.0, 3.0), (1.25 * PI, 3.0)),
            sign: LinkSign::Minus,
        }),
        ModelId::Cl(10) => Structure::ExpVonMises(ExpVonMises::new(1.5 * PI, 2.0, 3.0)?),
        ModelId::Cl(11) => Structure::QsCopula(QsCopula {
            first: CircularDensity::cardioid(1.5 * PI, 0.45)?,
            second: lin(LinearDensity::normal(1.0, 0.5)),
            alpha: QS_ALPHA,
        }),
        ModelId::Cl(12) => Structure::LinkCopula(LinkCopula {
            first: vm(1.5 * PI, 1.0),
            second: lin(LinearDensity::lognormal(0.5, 0.75)),
            link: CircularDensity::wrapped_cauchy(0.0, 0.75)?,
            sign: LinkSign::Minus,
        }),
        ModelId::Cc(1) => Structure::Independent { first: CircularDensity::uniform(), second: Marginal::Circular(vm(0.0, 2.0)) },
        ModelId::Cc(2) => Structure::Independent { first: vm(1.5 * PI, 1.0), second: Marginal::Circular(vm(PI, 3.0)) },
        ModelId::Cc(3) => Structure::Independent {
            first: vm(1.5 * PI, 2.0),
            second: circ(CircularDensity::wrapped_cauchy(PI / 4.0, 0.7)),
        },
        ModelId::Cc(4) => Structure::Independent {
            first: vm2(0.5, (0.0, 10.0), (1.5 * PI, 10.0)),
            second: circ(CircularDensity::cardioid(0.0, 0.25)),
        },
        ModelId::Cc(5) => Structure::Independent {
            first: vm2(0.5, (0.0, 3.0), (1.5 * PI, 3.0)),
            second: Marginal::Circular(vm2(0.5, (PI / 4.0, 5.0), (1.75 * PI, 5.0))),
        },
        ModelId::Cc(6) => Structure::Sine(SineModel::new(7.0 * PI / 8.0, 0.5, 0.0, 1.0, -3.0)?),
        ModelId::Cc(7) => Structure::Sine(SineModel::new(0.0, 5.0, 0.0, 1.0, -5.0)?),
        ModelId::Cc(8) => Structure::LinkCopula(LinkCopula {
            first: CircularDensity::cardioid(0.0, 0.5)?,
            second: Marginal::Circular(CircularDensity::uniform()),
            link: vm(PI, 7.0),
            sign: LinkSign::Minus,
        }),
        ModelId::Cc(9) => Structure::LinkCopula(LinkCopula {
            first: CircularDensity::uniform(),
            second: Marginal::Circular(CircularDensity::uniform()),
            link: vm2(0.5, (PI / 4.0, 10.0), (1.75 * PI, 10.0)),
            sign: LinkSign::Plus,
        }),
        ModelId::Cc(10) => Structure::WrappedNormalTorus(WrappedNormalTorus::new(0.0, PI / 6.0, 1.5, 0.25, 0.0)?),
        ModelId::Cc(11) => Structure::WrappedNormalTorus(WrappedNormalTorus::new(0.0, 0.0, 1.0, 1.0, -0.9)?),
        ModelId::Cc(12) => Structure::LinkCopula(LinkCopula {
            first: vm(0.75 * PI, 5.0),
            second: Marginal::Circular(vm(0.0, 1.0)),
            link: CircularDensity::wrapped_cauchy(0.0, 0.5)?,
            sign: LinkSign::Minus,
        }),
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    Ok(s)
}

/// Catalog model with its table parameters, optionally overridden by name.
pub fn make_model(id: ModelId, overrides: &[(&str, f64)]) -> Result<JointModel> {
    let base = JointModel::new(id, default_structure(id)?)?;
    if overrides.is_empty() {
        Ok(base)
    } else {
        base.with_overrides(overrides.iter().copied())
    }
}

/// Parses an id such as `CL7` and builds the default model.
pub fn model_by_name(name: &str) -> Result<JointModel> {
    make_model(name.parse()?, &[])
}

/// Fixed deviation densities used to build alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deviation {
    /// `vM(pi, 3) x N(2, 1)`.
    Delta1,
    /// `vM(pi, 3) x LN(1/2, 1/2)`.
    Delta2,
    /// `vM(0, 3) x vM(pi, 3)`.
    Delta3,
}

impl Deviation {
    /// Deviation paired with a catalog model.
    pub fn for_model(id: ModelId) -> Result<Self> {
        match id {
            ModelId::Cl(2) | ModelId::Cl(3) | ModelId::Cl(12) => Ok(Deviation::Delta2),
            ModelId::Cl(_) => Ok(Deviation::Delta1),
            ModelId::Cc(_) => Ok(Deviation::Delta3),
            ModelId::Custom => Err(Error::UnknownModel("custom models have no default deviation".into())),
        }
    }

    pub fn model(&self) -> JointModel {
        let structure = match self {
            Deviation::Delta1 => Structure::Independent { first: vm(PI, 3.0), second: lin(LinearDensity::normal(2.0, 1.0)) },
            Deviation::Delta2 => {
                Structure::Independent { first: vm(PI, 3.0), second: lin(LinearDensity::lognormal(0.5, 0.5)) }
            }
            Deviation::Delta3 => Structure::Independent { first: vm(0.0, 3.0), second: Marginal::Circular(vm(PI, 3.0)) },
        };
        JointModel::new(ModelId::Custom, structure).expect("deviation structures are valid")
    }

    pub fn support(&self) -> Support {
        match self {
            Deviation::Delta3 => Support::CircleCircle,
            _ => Support::CircleLine,
        }
    }
}

/// `(1 - delta) f + delta Delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureAlternative {
    pub base: JointModel,
    pub delta: f64,
    pub deviation: Deviation,
    deviation_model: JointModel,
}

impl MixtureAlternative {
    pub fn new(base: JointModel, delta: f64, deviation: Deviation) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta must lie in [0, 1], got {delta}")));
        }
        if deviation.support() != base.support() {
            return Err(Error::SupportMismatch {
                expected: base.support().to_string(),
                found: format!("deviation on {}", deviation.support()),
            });
        }
        Ok(Self { deviation_model: deviation.model(), base, delta, deviation })
    }

    /// Alternative for a catalog model with its assigned deviation.
    pub fn for_catalog(base: JointModel, delta: f64) -> Result<Self> {
        let d = Deviation::for_model(base.id())?;
        Self::new(base, delta, d)
    }

    pub fn support(&self) -> Support {
        self.base.support()
    }

    pub fn deviation_model(&self) -> &JointModel {
        &self.deviation_model
    }

    pub fn pdf(&self, theta: f64, b: f64) -> f64 {
        let f = if self.delta < 1.0 { self.base.pdf(theta, b) } else { 0.0 };
        let d = if self.delta > 0.0 { self.deviation_model.pdf(theta, b) } else { 0.0 };
        (1.0 - self.delta) * f + self.delta * d
    }

    pub fn pdf_at(&self, p: &GridPoint<'_>) -> f64 {
        match self.support() {
            Support::CircleCircle => self.pdf(p.theta(), p.psi()),
            _ => self.pdf(p.theta(), p.z()),
        }
    }

    pub fn tabulate(&self, grid: &QuadratureGrid) -> Result<Vec<f64>> {
        let mut f = self.base.tabulate(grid)?;
        if self.delta > 0.0 {
            let d = self.deviation_model.tabulate(grid)?;
            f.iter_mut().zip(&d).for_each(|(a, b)| *a = (1.0 - self.delta) * *a + self.delta * b);
        }
        Ok(f)
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        if self.delta > 0.0 && rng.random::<f64>() < self.delta {
            self.deviation_model.sample_pair(rng)
        } else {
            self.base.sample_pair(rng)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<JointSample> {
        let (a, b): (Vec<f64>, Vec<f64>) = (0..n).map(|_| self.sample_pair(rng)).unzip();
        JointSample::from_pairs(self.support(), &a, &b)
    }
}
