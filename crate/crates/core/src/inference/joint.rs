//! Joint model fitting: marginal products, closed forms, two-step copula
//! estimation and full-likelihood Nelder–Mead.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::marginal::{check_len, fit_circular, fit_linear, fit_wrapped_cauchy_rho, inverse_a1, mean_direction};
use super::optim::nelder_mead;
use super::{FitMethod, FitOptions, FitResult};
use crate::error::{Error, Result};
use crate::models::circular::{CircularDensity, CircularFamily};
use crate::models::joint::{JointModel, Marginal, MarginalFamily, Structure};
use crate::models::linear::LinearFamily;
use crate::models::sampling::JointSample;

/// `sum_i ln f(theta_i, b_i)`.
pub fn log_likelihood(model: &JointModel, sample: &JointSample) -> f64 {
    sample.theta().iter().zip(sample.second()).map(|(&t, b)| model.log_pdf(t, b)).sum()
}

fn check_support(template: &JointModel, sample: &JointSample) -> Result<()> {
    if template.support() != sample.support() {
        return Err(Error::SupportMismatch {
            expected: format!("{} sample for {}", template.support(), template.id()),
            found: format!("{} sample", sample.support()),
        });
    }
    check_len(sample.len())
}

fn fit_marginal<R: Rng + ?Sized>(
    family: MarginalFamily,
    x: &[f64],
    rng: &mut R,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> Result<FitResult> {
    match family {
        MarginalFamily::Circular(f) => fit_circular(f, x, rng, opts, warm),
        MarginalFamily::Linear(f) => fit_linear(f, x, rng, opts, warm),
    }
}

fn split_warm(warm: Option<&[f64]>, at: usize) -> (Option<&[f64]>, Option<&[f64]>) {
    match warm {
        Some(w) if w.len() >= at => (Some(&w[..at]), Some(&w[at..])),
        _ => (None, None),
    }
}

/// Fits `template`'s family to `sample`. `warm` is a previous estimate in the
/// same layout used as the starting point of iterative fitters.
pub fn fit_joint<R: Rng + ?Sized>(
    template: &JointModel,
    sample: &JointSample,
    rng: &mut R,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> Result<FitResult> {
    check_support(template, sample)?;
    let theta = sample.theta();
    let b = sample.second();
    let warm = warm.filter(|w| w.len() == template.param_names().len());
    let (params, method, converged, iterations) = match template.structure() {
        Structure::Independent { first, second } => {
            let k = first.family().param_names().len();
            let (w1, w2) = split_warm(warm, k);
            let a = fit_circular(first.family(), &theta, rng, opts, w1)?;
            let c = fit_marginal(second.family(), &b, rng, opts, w2)?;
            (
                [a.theta_hat, c.theta_hat].concat(),
                a.method.combine(c.method),
                a.converged && c.converged,
                a.iterations + c.iterations,
            )
        }
        Structure::Mardia(_) => {
            let (p, ok) = fit_mardia(&theta, &b)?;
            (p, FitMethod::ClosedForm, ok, 0)
        }
        Structure::ExpVonMises(_) => {
            let r = fit_cl10(sample)?;
            return Ok(r);
        }
        Structure::LinkCopula(c) => {
            let k1 = c.first.family().param_names().len();
            let k2 = k1 + c.second.family().param_names().len();
            let (w1, rest) = split_warm(warm, k1);
            let (w2, w3) = split_warm(rest, k2 - k1);
            let f1 = fit_circular(c.first.family(), &theta, rng, opts, w1)?;
            let f2 = fit_marginal(c.second.family(), &b, rng, opts, w2)?;
            let d1 = CircularDensity::from_params(c.first.family(), &f1.theta_hat)?;
            let d2 = Marginal::from_params(c.second.family(), &f2.theta_hat)?;
            let s = c.sign.value();
            let psi: Vec<f64> =
                theta.iter().zip(&b).map(|(&t, &v)| (TAU * (d1.cdf(t) + s * d2.cdf(v))).rem_euclid(TAU)).collect();
            let (g, ok, it) = match c.link.family() {
                CircularFamily::WrappedCauchy => {
                    // location fixed at the template's value
                    let mu = c.link.params()[0];
                    let (rho, _) = fit_wrapped_cauchy_rho(&psi, mu);
                    (vec![mu, rho], true, 0)
                }
                family => {
                    let r = fit_circular(family, &psi, rng, opts, w3)?;
                    (r.theta_hat, r.converged, r.iterations)
                }
            };
            (
                [f1.theta_hat, f2.theta_hat, g].concat(),
                FitMethod::TwoStep,
                f1.converged && f2.converged && ok,
                f1.iterations + f2.iterations + it,
            )
        }
        Structure::QsCopula(c) => {
            let k1 = c.first.family().param_names().len();
            let (w1, w2) = split_warm(warm.map(|w| &w[..w.len() - 1]), k1);
            let f1 = fit_circular(c.first.family(), &theta, rng, opts, w1)?;
            let f2 = fit_marginal(c.second.family(), &b, rng, opts, w2)?;
            (
                [f1.theta_hat, f2.theta_hat, vec![c.alpha]].concat(),
                FitMethod::TwoStep,
                f1.converged && f2.converged,
                f1.iterations + f2.iterations,
            )
        }
        Structure::Sine(_) | Structure::WrappedNormalTorus(_) => {
            let start = match warm {
                Some(w) => w.to_vec(),
                None => moment_estimate(template, sample)?,
            };
            let sine = matches!(template.structure(), Structure::Sine(_));
            let to_free = |p: &[f64]| -> Vec<f64> {
                if sine {
                    vec![p[0], p[1].max(1e-8).ln(), p[2], p[3].max(1e-8).ln(), p[4]]
                } else {
                    vec![p[0], p[1], p[2].ln(), p[3].ln(), p[4].clamp(-0.999, 0.999).atanh()]
                }
            };
            let from_free = |x: &[f64]| -> Vec<f64> {
                if sine {
                    vec![x[0].rem_euclid(TAU), x[1].exp(), x[2].rem_euclid(TAU), x[3].exp(), x[4]]
                } else {
                    vec![x[0].rem_euclid(TAU), x[1].rem_euclid(TAU), x[2].exp(), x[3].exp(), x[4].tanh()]
                }
            };
            let nll = |x: &[f64]| match template.with_theta(&from_free(x)) {
                Ok(m) => {
                    let ll = log_likelihood(&m, sample);
                    if ll.is_finite() {
                        -ll
                    } else {
                        f64::INFINITY
                    }
                }
                Err(_) => f64::INFINITY,
            };
            let m = nelder_mead(nll, &to_free(&start), &opts.nelder_mead);
            (from_free(&m.x), FitMethod::NelderMead, m.converged, m.evals)
        }
    };
    let model = template.with_theta(&params)?;
    let ll = log_likelihood(&model, sample);
    Ok(FitResult { theta_hat: params, log_likelihood: ll, converged: converged && ll.is_finite(), iterations, method })
}

/// Fits and returns the fitted model alongside the fit summary.
pub fn fit_model<R: Rng + ?Sized>(
    template: &JointModel,
    sample: &JointSample,
    rng: &mut R,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> Result<(JointModel, FitResult)> {
    let r = fit_joint(template, sample, rng, opts, warm)?;
    Ok((template.with_theta(&r.theta_hat)?, r))
}

/// Exact ML for the von Mises–normal regression model: the von Mises fit of
/// the angles and the least-squares regression of `z` on
/// `(1, cos theta, sin theta)` determine all six parameters.
fn fit_mardia(theta: &[f64], z: &[f64]) -> Result<(Vec<f64>, bool)> {
    let n = theta.len() as f64;
    let (mu, r) = mean_direction(theta, None);
    let (kappa, ok, _) = inverse_a1(r);
    if kappa < 1e-10 {
        return Err(Error::DegenerateSample("angles show no concentration; regression terms unidentifiable".into()));
    }
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for (&t, &y) in theta.iter().zip(z) {
        let row = [1.0, t.cos(), t.sin()];
        for a in 0..3 {
            xty[a] += row[a] * y;
            for c in 0..3 {
                xtx[a][c] += row[a] * row[c];
            }
        }
    }
    let beta = solve3(xtx, xty).ok_or_else(|| Error::DegenerateSample("singular regression design".into()))?;
    let rss: f64 = theta
        .iter()
        .zip(z)
        .map(|(&t, &y)| (y - beta[0] - beta[1] * t.cos() - beta[2] * t.sin()).powi(2))
        .sum();
    let s2 = rss / n;
    if !(s2 > 0.0) {
        return Err(Error::DegenerateSample("zero residual variance".into()));
    }
    let sigma = (s2 + (beta[1] * beta[1] + beta[2] * beta[2]) / kappa).sqrt();
    let scale = sigma * kappa.sqrt();
    let m = beta[0] + beta[1] * mu.cos() + beta[2] * mu.sin();
    Ok((vec![mu, kappa, m, sigma, beta[1] / scale, beta[2] / scale], ok))
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d.abs() < 1e-12 * a[0][0].powi(3).max(1e-300) {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = b[r];
        }
        *xk = det(&m) / d;
    }
    Some(x)
}

/// Closed-form ML for the exponential–von Mises model.
pub fn fit_cl10(sample: &JointSample) -> Result<FitResult> {
    let s = sample.as_dirlin()?;
    check_len(s.len())?;
    let theta = sample.theta();
    let z = s.linear();
    if let Some(bad) = z.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::Domain(format!("exponential model requires z > 0, found {bad}")));
    }
    let n = z.len() as f64;
    let (sc, ss) = theta.iter().zip(z).fold((0.0, 0.0), |(c, s), (&t, &v)| (c + v * t.cos(), s + v * t.sin()));
    // the branch with positive weighted resultant maximizes the likelihood
    let mu = ss.atan2(sc).rem_euclid(TAU);
    let zbar = z.iter().sum::<f64>() / n;
    let zc = theta.iter().zip(z).map(|(&t, &v)| v * (t - mu).cos()).sum::<f64>() / n;
    let denom = zbar * zbar - zc * zc;
    if !(denom > 1e-14 * zbar * zbar) {
        return Err(Error::DegenerateSample(format!("mean^2 = {} does not exceed weighted cosine mean^2 = {}", zbar * zbar, zc * zc)));
    }
    let lambda = zbar / denom;
    let k2 = lambda * lambda - lambda / zbar;
    if k2 < 0.0 {
        return Err(Error::DegenerateSample("negative squared concentration".into()));
    }
    let kappa = k2.sqrt();
    let model = crate::models::make_model(crate::models::ModelId::Cl(10), &[("mu", mu), ("kappa", kappa), ("lambda", lambda)])?;
    let ll = log_likelihood(&model, sample);
    Ok(FitResult {
        theta_hat: vec![mu, kappa, lambda],
        log_likelihood: ll,
        converged: ll.is_finite(),
        iterations: 0,
        method: FitMethod::ClosedForm,
    })
}

fn circular_moments(family: CircularFamily, x: &[f64]) -> Vec<f64> {
    let (mu, r) = mean_direction(x, None);
    match family {
        CircularFamily::Uniform => vec![],
        CircularFamily::VonMises => vec![mu, inverse_a1(r).0],
        CircularFamily::Cardioid => vec![mu, r.min(0.49)],
        CircularFamily::WrappedCauchy => vec![mu, r.min(0.99)],
        CircularFamily::WrappedNormal => vec![mu, (-2.0 * r.clamp(1e-3, 0.999).ln()).sqrt()],
        CircularFamily::VmMixture => {
            let k = inverse_a1(r).0.max(0.5);
            vec![0.5, mu, k, 0.5, (mu + PI).rem_euclid(TAU), k]
        }
    }
}

fn linear_moments(family: LinearFamily, z: &[f64]) -> Vec<f64> {
    let n = z.len() as f64;
    let mv = |w: &[f64]| {
        let m = w.iter().sum::<f64>() / n;
        (m, (w.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt())
    };
    match family {
        LinearFamily::Normal => {
            let (m, s) = mv(z);
            vec![m, s]
        }
        LinearFamily::LogNormal => {
            let logs: Vec<f64> = z.iter().map(|v| v.max(1e-300).ln()).collect();
            let (m, s) = mv(&logs);
            vec![m, s]
        }
        LinearFamily::Gamma => {
            let (m, s) = mv(z);
            vec![m / (s * s), m * m / (s * s)]
        }
        LinearFamily::NormalMixture => {
            let (m, s) = mv(z);
            vec![0.5, m - 0.5 * s, s, 0.5, m + 0.5 * s, s]
        }
    }
}

fn marginal_moments(family: MarginalFamily, x: &[f64]) -> Vec<f64> {
    match family {
        MarginalFamily::Circular(f) => circular_moments(f, x),
        MarginalFamily::Linear(f) => linear_moments(f, x),
    }
}

/// Method-of-moments estimate, used as the optimizer start.
pub fn moment_estimate(template: &JointModel, sample: &JointSample) -> Result<Vec<f64>> {
    check_support(template, sample)?;
    let theta = sample.theta();
    let b = sample.second();
    let (mu1, r1) = mean_direction(&theta, None);
    let p = match template.structure() {
        Structure::Independent { first, second } => {
            [circular_moments(first.family(), &theta), marginal_moments(second.family(), &b)].concat()
        }
        Structure::Mardia(_) => fit_mardia(&theta, &b)?.0,
        Structure::ExpVonMises(_) => fit_cl10(sample)?.theta_hat,
        Structure::LinkCopula(c) => {
            let mut g = c.link.params();
            if c.link.family() != CircularFamily::WrappedCauchy {
                g = circular_moments(c.link.family(), &theta);
            }
            [circular_moments(c.first.family(), &theta), marginal_moments(c.second.family(), &b), g].concat()
        }
        Structure::QsCopula(c) => {
            [circular_moments(c.first.family(), &theta), marginal_moments(c.second.family(), &b), vec![c.alpha]].concat()
        }
        Structure::Sine(_) => {
            let (mu2, r2) = mean_direction(&b, None);
            let (k1, k2) = (inverse_a1(r1).0.min(50.0), inverse_a1(r2).0.min(50.0));
            let (sa, sb): (Vec<f64>, Vec<f64>) = theta.iter().zip(&b).map(|(t, p)| ((t - mu1).sin(), (p - mu2).sin())).unzip();
            let lambda = -precision_offdiag(&sa, &sb).clamp(-10.0, 10.0);
            vec![mu1, k1.max(1e-3), mu2, k2.max(1e-3), lambda]
        }
        Structure::WrappedNormalTorus(_) => {
            let (mu2, r2) = mean_direction(&b, None);
            let wrap = |d: f64| (d + PI).rem_euclid(TAU) - PI;
            let (da, db): (Vec<f64>, Vec<f64>) = theta.iter().zip(&b).map(|(t, p)| (wrap(t - mu1), wrap(p - mu2))).unzip();
            let s1 = (-2.0 * r1.clamp(1e-3, 0.999).ln()).sqrt();
            let s2 = (-2.0 * r2.clamp(1e-3, 0.999).ln()).sqrt();
            vec![mu1, mu2, s1, s2, correlation(&da, &db).clamp(-0.95, 0.95)]
        }
    };
    Ok(p)
}

fn covariance(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
        sab += (x - ma) * (y - mb);
    }
    (saa / n, sbb / n, sab / n)
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (saa, sbb, sab) = covariance(a, b);
    if saa > 0.0 && sbb > 0.0 {
        sab / (saa * sbb).sqrt()
    } else {
        0.0
    }
}

fn precision_offdiag(a: &[f64], b: &[f64]) -> f64 {
    let (saa, sbb, sab) = covariance(a, b);
    let det = saa * sbb - sab * sab;
    if det > 0.0 {
        -sab / det
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_model, ModelId};

    #[test]
    fn cl10_hand_arithmetic() {
        // two points at mu = 0: z = (a, b) at theta = (0, pi) gives
        // zbar = (a + b)/2 and zc = (a - b)/2
        let (a, b) = (0.5, 1.0 / 6.0);
        let s = JointSample::from_pairs(crate::special::grid::Support::CircleLine, &[0.0, PI], &[a, b]).unwrap();
        let r = fit_cl10(&s).unwrap();
        // zbar = 1/3, zc = 1/6 -> lambda = 4
        assert!((r.theta_hat[2] - 4.0).abs() < 1e-12, "{:?}", r.theta_hat);
        assert!(r.theta_hat[0].abs() < 1e-12);
    }

    #[test]
    fn cl10_degenerate() {
        let s = JointSample::from_pairs(crate::special::grid::Support::CircleLine, &[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0])
            .unwrap();
        assert!(matches!(fit_cl10(&s), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn mardia_reproduces_exact_regression() {
        // z exactly follows the conditional mean plus symmetric residuals
        let model = make_model(ModelId::Cl(6), &[]).unwrap();
        let Structure::Mardia(m) = model.structure().clone() else { unreachable!() };
        let theta: Vec<f64> = (0..400).map(|k| (k as f64 * 0.7).rem_euclid(TAU)).collect();
        let z: Vec<f64> = theta
            .iter()
            .enumerate()
            .map(|(k, &t)| m.conditional_mean(t) + if k % 2 == 0 { 0.3 } else { -0.3 })
            .collect();
        let (p, _) = fit_mardia(&theta, &z).unwrap();
        let fitted = crate::models::joint::Mardia::new(p[0], p[1], p[2], p[3], p[4], p[5]).unwrap();
        for &t in &theta[..20] {
            assert!((fitted.conditional_mean(t) - m.conditional_mean(t)).abs() < 1e-2);
        }
        assert!((fitted.conditional_sd() - 0.3).abs() < 1e-2);
    }
}
