//! Copula-link sampling and joint samples.

use std::f64::consts::TAU;

use rand::Rng;

use super::circular::CircularDensity;
use super::joint::{JointModel, LinkSign};
use crate::error::{Error, Result};
use crate::kde::{DirDirSample, DirLinSample};
use crate::special::grid::Support;

/// Draw from `c(u, v) = 2pi g(2pi (u +- v))`: `Psi ~ g`, `V ~ U(0,1)`,
/// `U = ((Psi -+ 2pi V) mod 2pi) / 2pi`.
pub fn link_copula_pair<R: Rng + ?Sized>(g: &CircularDensity, sign: LinkSign, rng: &mut R) -> (f64, f64) {
    let psi = g.sample(rng);
    let v: f64 = rng.random();
    let u = (psi - sign.value() * TAU * v).rem_euclid(TAU) / TAU;
    // rem_euclid may round up to exactly 2pi
    (if u >= 1.0 { 0.0 } else { u }, v)
}

pub fn sample_link_copula<R: Rng + ?Sized>(
    g: &CircularDensity,
    sign: LinkSign,
    n: usize,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    (0..n).map(|_| link_copula_pair(g, sign, rng)).collect()
}

pub fn sample_circular<R: Rng + ?Sized>(d: &CircularDensity, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(d.sample_n(n, rng))
}

/// A sample on the cylinder or the torus.
#[derive(Debug, Clone, PartialEq)]
pub enum JointSample {
    CircleLine(DirLinSample),
    CircleCircle(DirDirSample),
}

impl JointSample {
    /// Builds from angles and second coordinates (linear values or angles).
    pub fn from_pairs(support: Support, theta: &[f64], b: &[f64]) -> Result<Self> {
        match support {
            Support::CircleLine => Ok(JointSample::CircleLine(DirLinSample::from_angles(theta, b)?)),
            Support::CircleCircle => Ok(JointSample::CircleCircle(DirDirSample::from_angles(theta, b)?)),
            Support::SphereLine => Err(Error::UnsupportedDimension(2)),
        }
    }

    pub fn support(&self) -> Support {
        match self {
            JointSample::CircleLine(_) => Support::CircleLine,
            JointSample::CircleCircle(_) => Support::CircleCircle,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            JointSample::CircleLine(s) => s.len(),
            JointSample::CircleCircle(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// First coordinate as angles in `[0, 2pi)`.
    pub fn theta(&self) -> Vec<f64> {
        let d = match self {
            JointSample::CircleLine(s) => s.directions(),
            JointSample::CircleCircle(s) => s.first(),
        };
        d.iter().map(|x| x[1].atan2(x[0]).rem_euclid(TAU)).collect()
    }

    /// Second coordinate: linear values or angles in `[0, 2pi)`.
    pub fn second(&self) -> Vec<f64> {
        match self {
            JointSample::CircleLine(s) => s.linear().to_vec(),
            JointSample::CircleCircle(s) => s.second().iter().map(|x| x[1].atan2(x[0]).rem_euclid(TAU)).collect(),
        }
    }

    pub fn as_dirlin(&self) -> Result<&DirLinSample> {
        match self {
            JointSample::CircleLine(s) => Ok(s),
            _ => Err(Error::SupportMismatch { expected: "circle-line sample".into(), found: self.support().to_string() }),
        }
    }

    pub fn as_dirdir(&self) -> Result<&DirDirSample> {
        match self {
            JointSample::CircleCircle(s) => Ok(s),
            _ => Err(Error::SupportMismatch { expected: "circle-circle sample".into(), found: self.support().to_string() }),
        }
    }
}

/// `n` independent draws from `model`.
pub fn sample_joint<R: Rng + ?Sized>(model: &JointModel, n: usize, rng: &mut R) -> Result<JointSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let (a, b): (Vec<f64>, Vec<f64>) = (0..n).map(|_| model.sample_pair(rng)).unzip();
    JointSample::from_pairs(model.support(), &a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn link_identity_holds_per_draw() {
        let g = CircularDensity::von_mises(PI, 7.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for sign in [LinkSign::Plus, LinkSign::Minus] {
            for _ in 0..1000 {
                let mut probe = rng.clone();
                let psi = g.sample(&mut probe);
                let (u, v) = link_copula_pair(&g, sign, &mut rng);
                let lhs = (TAU * u + sign.value() * TAU * v).rem_euclid(TAU);
                let d = (lhs - psi).rem_euclid(TAU);
                assert!(d.min(TAU - d) < 1e-12);
                assert!((0.0..1.0).contains(&u) && (0.0..1.0).contains(&v));
            }
        }
    }

    #[test]
    fn empty_requests_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_circular(&CircularDensity::uniform(), 0, &mut rng).is_err());
    }
}
