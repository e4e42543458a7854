//! Leave-one-out log-likelihood of the kernel estimators.

use super::estimator::DirectionalWeight;
use super::sample::{check_directional, Bandwidths, DirDirSample, DirLinSample, Directions};
use crate::error::{Error, Result};
use crate::kernel::{DirectionalKernel, KernelPair, LinearKernel};

/// Pairwise geometry of a sample, reused across bandwidth evaluations.
#[derive(Debug, Clone)]
pub struct LooObjective {
    n: usize,
    q1: usize,
    /// `1 - X_i'X_k`, row-major `n x n`.
    d1: Vec<f64>,
    second: SecondGeometry,
    first_kernel: DirectionalKernel,
}

#[derive(Debug, Clone)]
enum SecondGeometry {
    /// `Z_i - Z_k` and the linear kernel.
    Linear(Vec<f64>, LinearKernel),
    /// `1 - Y_i'Y_k`, the dimension and kernel of the second factor.
    Directional(Vec<f64>, usize, DirectionalKernel),
}

fn cosine_distances(d: &Directions) -> Vec<f64> {
    let n = d.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in (i + 1)..n {
            let t: f64 = d.get(i).iter().zip(d.get(k)).map(|(a, b)| a * b).sum();
            let v = (1.0 - t).max(0.0);
            out[i * n + k] = v;
            out[k * n + i] = v;
        }
    }
    out
}

impl LooObjective {
    pub fn dirlin(sample: &DirLinSample, kernel: &KernelPair) -> Result<Self> {
        let n = sample.len();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        let z = sample.linear();
        let mut dz = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                dz[i * n + k] = z[i] - z[k];
            }
        }
        Ok(Self {
            n,
            q1: sample.q(),
            d1: cosine_distances(sample.directions()),
            second: SecondGeometry::Linear(dz, kernel.linear.clone()),
            first_kernel: kernel.directional.clone(),
        })
    }

    pub fn dirdir(sample: &DirDirSample, first: &DirectionalKernel, second: &DirectionalKernel) -> Result<Self> {
        let n = sample.len();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        Ok(Self {
            n,
            q1: sample.first().q(),
            d1: cosine_distances(sample.first()),
            second: SecondGeometry::Directional(cosine_distances(sample.second()), sample.second().q(), second.clone()),
            first_kernel: first.clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `sum_i log f_{-i}(X_i, Z_i)`; `-inf` when some leave-one-out density
    /// vanishes or the bandwidths are inadmissible.
    pub fn value(&self, bw: &Bandwidths) -> f64 {
        self.try_value(bw).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn try_value(&self, bw: &Bandwidths) -> Result<f64> {
        check_directional(bw.h)?;
        let n = self.n;
        let nm1 = (n - 1) as f64;
        let w1 = DirectionalWeight::new(&self.first_kernel, self.q1, bw.h)?;
        let k1 = 1.0 / (bw.h * bw.h);
        let mut buf = vec![0.0; n];
        match &self.second {
            SecondGeometry::Linear(dz, lk) => {
                if !(bw.g > 0.0) || !bw.g.is_finite() {
                    return Err(Error::InvalidBandwidth(format!("g must be positive, got {}", bw.g)));
                }
                if self.first_kernel.is_von_mises() && lk.is_normal() {
                    let a = 0.5 / (bw.g * bw.g);
                    let log_const = w1.log_normalizer() - bw.g.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - nm1.ln();
                    let rows = (0..n).map(|i| {
                        for k in 0..n {
                            let d = dz[i * n + k];
                            buf[k] = -k1 * self.d1[i * n + k] - a * d * d;
                        }
                        log_const + log_sum_exp_except(&buf, i)
                    });
                    return Ok(sum_or_neg_inf(rows));
                }
                let inv_g = 1.0 / bw.g;
                let rows = (0..n).map(|i| {
                    let mut s = 0.0;
                    for k in (0..n).filter(|&k| k != i) {
                        s += w1.at_dot(1.0 - self.d1[i * n + k]) * lk.eval(dz[i * n + k] * inv_g);
                    }
                    (s * inv_g / nm1).ln()
                });
                Ok(sum_or_neg_inf(rows))
            }
            SecondGeometry::Directional(d2, q2, l2) => {
                check_directional(bw.g)?;
                let w2 = DirectionalWeight::new(l2, *q2, bw.g)?;
                if self.first_kernel.is_von_mises() && l2.is_von_mises() {
                    let k2 = 1.0 / (bw.g * bw.g);
                    let log_const = w1.log_normalizer() + w2.log_normalizer() - nm1.ln();
                    let rows = (0..n).map(|i| {
                        for k in 0..n {
                            buf[k] = -k1 * self.d1[i * n + k] - k2 * d2[i * n + k];
                        }
                        log_const + log_sum_exp_except(&buf, i)
                    });
                    return Ok(sum_or_neg_inf(rows));
                }
                let rows = (0..n).map(|i| {
                    let mut s = 0.0;
                    for k in (0..n).filter(|&k| k != i) {
                        s += w1.at_dot(1.0 - self.d1[i * n + k]) * w2.at_dot(1.0 - d2[i * n + k]);
                    }
                    (s / nm1).ln()
                });
                Ok(sum_or_neg_inf(rows))
            }
        }
    }
}

fn sum_or_neg_inf(rows: impl Iterator<Item = f64>) -> f64 {
    let mut total = 0.0;
    for r in rows {
        if !r.is_finite() {
            return f64::NEG_INFINITY;
        }
        total += r;
    }
    total
}

fn log_sum_exp_except(v: &[f64], skip: usize) -> f64 {
    let m = v
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != skip)
        .map(|(_, &x)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return f64::NEG_INFINITY;
    }
    let s: f64 = v.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &x)| (x - m).exp()).sum();
    m + s.ln()
}

/// Leave-one-out log-likelihood of the directional-linear estimator.
pub fn loo_log_likelihood(sample: &DirLinSample, bw: &Bandwidths, kernel: &KernelPair) -> Result<f64> {
    bw.check_dirlin()?;
    Ok(LooObjective::dirlin(sample, kernel)?.value(bw))
}

/// Leave-one-out log-likelihood of the directional-directional estimator.
pub fn loo_log_likelihood_dirdir(
    sample: &DirDirSample,
    bw: &Bandwidths,
    first: &DirectionalKernel,
    second: &DirectionalKernel,
) -> Result<f64> {
    bw.check_dirdir()?;
    Ok(LooObjective::dirdir(sample, first, second)?.value(bw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kde::estimator::kde_dirlin;

    #[test]
    fn matches_explicit_leave_one_out() {
        let theta = [0.2, 1.1, 2.5, 4.0, 5.5];
        let z = [0.1, -0.4, 1.3, 0.7, -1.0];
        let s = DirLinSample::from_angles(&theta, &z).unwrap();
        let bw = Bandwidths::new(0.7, 0.6).unwrap();
        for kernel in [
            KernelPair::default(),
            KernelPair { directional: DirectionalKernel::VonMises, linear: LinearKernel::Epanechnikov },
        ] {
            let mut expected = 0.0;
            for i in 0..5 {
                let idx: Vec<usize> = (0..5).filter(|&k| k != i).collect();
                let sub = s.select(&idx);
                let x = [theta[i].cos(), theta[i].sin()];
                expected += kde_dirlin(&sub, &x, z[i], &bw, &kernel).unwrap().ln();
            }
            let v = loo_log_likelihood(&s, &bw, &kernel).unwrap();
            if expected.is_finite() {
                assert!((v - expected).abs() < 1e-10, "{v} vs {expected}");
            } else {
                assert_eq!(v, f64::NEG_INFINITY);
            }
        }
    }

    #[test]
    fn coincident_pair_is_symmetric_and_finite() {
        let s = DirLinSample::from_angles(&[1.0, 1.0], &[0.5, 0.5]).unwrap();
        let v = loo_log_likelihood(&s, &Bandwidths::new(0.5, 0.5).unwrap(), &KernelPair::default()).unwrap();
        assert!(v.is_finite());
        let r = s.select(&[1, 0]);
        let w = loo_log_likelihood(&r, &Bandwidths::new(0.5, 0.5).unwrap(), &KernelPair::default()).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn needs_two_points() {
        let s = DirLinSample::from_angles(&[1.0], &[0.5]).unwrap();
        assert!(matches!(
            loo_log_likelihood(&s, &Bandwidths::new(0.5, 0.5).unwrap(), &KernelPair::default()),
            Err(Error::InsufficientData { .. })
        ));
    }
}
