//! Maximum likelihood for circular and linear marginals.

use std::f64::consts::TAU;

use rand::Rng;
use statrs::function::gamma::digamma;

use super::optim::{golden_section, nelder_mead};
use super::{FitMethod, FitOptions, FitResult};
use crate::error::{Error, Result};
use crate::models::circular::{CircularDensity, CircularFamily};
use crate::models::linear::{LinearDensity, LinearFamily};
use crate::special::bessel_ratio;

/// Largest concentration returned by the von Mises fitter.
pub const KAPPA_CAP: f64 = 1e4;
const KAPPA_NEWTON_STEPS: usize = 100;

pub(crate) fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InsufficientData { needed: 2, got: n })
    } else {
        Ok(())
    }
}

/// Weighted mean direction and mean resultant length.
pub fn mean_direction(theta: &[f64], w: Option<&[f64]>) -> (f64, f64) {
    let (mut c, mut s, mut tot) = (0.0, 0.0, 0.0);
    for (i, &t) in theta.iter().enumerate() {
        let wi = w.map_or(1.0, |w| w[i]);
        c += wi * t.cos();
        s += wi * t.sin();
        tot += wi;
    }
    if tot <= 0.0 {
        return (0.0, 0.0);
    }
    (s.atan2(c).rem_euclid(TAU), (c * c + s * s).sqrt() / tot)
}

/// Solves `I_1(kappa)/I_0(kappa) = r` by safeguarded Newton. Returns the
/// root and whether it lies below the cap.
pub fn inverse_a1(r: f64) -> (f64, bool, usize) {
    if r <= 0.0 {
        return (0.0, true, 0);
    }
    if r >= 1.0 - 1e-12 || bessel_ratio(0.0, KAPPA_CAP) <= r {
        return (KAPPA_CAP, false, 0);
    }
    // Best and Fisher's starting approximation
    let mut k = if r < 0.53 {
        2.0 * r + r.powi(3) + 5.0 * r.powi(5) / 6.0
    } else if r < 0.85 {
        -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    } else {
        1.0 / (r.powi(3) - 4.0 * r * r + 3.0 * r)
    };
    let (mut lo, mut hi) = (0.0, KAPPA_CAP);
    for it in 0..KAPPA_NEWTON_STEPS {
        let a = bessel_ratio(0.0, k);
        let g = a - r;
        if g < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let d = 1.0 - a / k - a * a;
        let mut next = k - g / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - k).abs() <= 1e-14 * k.max(1.0) {
            return (next, true, it + 1);
        }
        k = next;
    }
    (k, true, KAPPA_NEWTON_STEPS)
}

fn circular_loglik(d: &CircularDensity, theta: &[f64]) -> f64 {
    theta.iter().map(|&t| d.log_pdf(t)).sum()
}

fn linear_loglik(d: &LinearDensity, z: &[f64]) -> f64 {
    z.iter().map(|&v| d.log_pdf(v)).sum()
}

/// Von Mises fit from a weighted sample.
fn von_mises_weighted(theta: &[f64], w: Option<&[f64]>) -> (f64, f64, bool, usize) {
    let (mu, r) = mean_direction(theta, w);
    let (kappa, ok, it) = inverse_a1(r);
    (mu, kappa, ok, it)
}

pub fn fit_circular<R: Rng + ?Sized>(
    family: CircularFamily,
    theta: &[f64],
    rng: &mut R,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> Result<FitResult> {
    check_len(theta.len())?;
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("non-finite angle".into()));
    }
    let (mu0, r0) = mean_direction(theta, None);
    let nm = |f: &dyn Fn(&[f64]) -> f64, x0: &[f64]| nelder_mead(f, x0, &opts.nelder_mead);
    let (params, method, converged, iterations) = match family {
        CircularFamily::Uniform => (vec![], FitMethod::ClosedForm, true, 0),
        CircularFamily::VonMises => {
            let (mu, kappa, ok, it) = von_mises_weighted(theta, None);
            (vec![mu, kappa], FitMethod::Newton1D, ok, it)
        }
        CircularFamily::Cardioid => {
            // rho = tanh(eta) / 2
            let start = match warm {
                Some(w) => vec![w[0], (2.0 * w[1]).clamp(-0.999, 0.999).atanh()],
                None => vec![mu0, (2.0 * r0).clamp(0.0, 0.98).atanh()],
            };
            let f = |x: &[f64]| {
                let d = CircularDensity::cardioid(x[0].rem_euclid(TAU), 0.5 * x[1].tanh());
                d.map_or(f64::INFINITY, |d| -circular_loglik(&d, theta))
            };
            let m = nm(&f, &start);
            let (mut mu, mut rho) = (m.x[0].rem_euclid(TAU), 0.5 * m.x[1].tanh());
            if rho < 0.0 {
                mu = (mu + std::f64::consts::PI).rem_euclid(TAU);
                rho = -rho;
            }
            (vec![mu, rho], FitMethod::NelderMead, m.converged, m.evals)
        }
        CircularFamily::WrappedCauchy => {
            let start = match warm {
                Some(w) => vec![w[0], logit(w[1].clamp(1e-6, 1.0 - 1e-9))],
                None => vec![mu0, logit(r0.clamp(0.01, 0.99))],
            };
            let f = |x: &[f64]| {
                let d = CircularDensity::wrapped_cauchy(x[0].rem_euclid(TAU), expit(x[1]));
                d.map_or(f64::INFINITY, |d| -circular_loglik(&d, theta))
            };
            let m = nm(&f, &start);
            (vec![m.x[0].rem_euclid(TAU), expit(m.x[1])], FitMethod::NelderMead, m.converged, m.evals)
        }
        CircularFamily::WrappedNormal => {
            let start = match warm {
                Some(w) => vec![w[0], w[1].ln()],
                None => vec![mu0, (-2.0 * r0.clamp(1e-3, 0.999).ln()).sqrt().ln()],
            };
            let f = |x: &[f64]| {
                let d = CircularDensity::wrapped_normal(x[0].rem_euclid(TAU), x[1].exp());
                d.map_or(f64::INFINITY, |d| -circular_loglik(&d, theta))
            };
            let m = nm(&f, &start);
            (vec![m.x[0].rem_euclid(TAU), m.x[1].exp()], FitMethod::NelderMead, m.converged, m.evals)
        }
        CircularFamily::VmMixture => {
            let (p, it, ok) = em_vm_mixture(theta, rng, opts, warm)?;
            (p, FitMethod::Em, ok, it)
        }
    };
    let d = CircularDensity::from_params(family, &params)?;
    let ll = circular_loglik(&d, theta);
    Ok(FitResult { theta_hat: params, log_likelihood: ll, converged: converged && ll.is_finite(), iterations, method })
}

pub fn fit_linear<R: Rng + ?Sized>(
    family: LinearFamily,
    z: &[f64],
    rng: &mut R,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> Result<FitResult> {
    check_len(z.len())?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite linear value".into()));
    }
    if family.is_positive() {
        if let Some(bad) = z.iter().find(|&&v| v <= 0.0) {
            return Err(Error::Domain(format!("{} requires positive data, found {bad}", family.name())));
        }
    }
    let n = z.len() as f64;
    let (params, method, converged, iterations) = match family {
        LinearFamily::Normal | LinearFamily::LogNormal => {
            let w: Vec<f64> =
                if family == LinearFamily::LogNormal { z.iter().map(|v| v.ln()).collect() } else { z.to_vec() };
            let m = w.iter().sum::<f64>() / n;
            let s = (w.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
            if !(s > 0.0) {
                return Err(Error::DegenerateSample("zero spread".into()));
            }
            (vec![m, s], FitMethod::ClosedForm, true, 0)
        }
        LinearFamily::Gamma => {
            let mean = z.iter().sum::<f64>() / n;
            let s = mean.ln() - z.iter().map(|v| v.ln()).sum::<f64>() / n;
            if !(s > 0.0) {
                return Err(Error::DegenerateSample("zero spread".into()));
            }
            let (p, ok, it) = gamma_shape(s);
            (vec![p / mean, p], FitMethod::Newton1D, ok, it)
        }
        LinearFamily::NormalMixture => {
            let (p, it, ok) = em_normal_mixture(z, rng, opts, warm)?;
            (p, FitMethod::Em, ok, it)
        }
    };
    let d = LinearDensity::from_params(family, &params)?;
    let ll = linear_loglik(&d, z);
    Ok(FitResult { theta_hat: params, log_likelihood: ll, converged: converged && ll.is_finite(), iterations, method })
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Trigamma by recurrence to `x >= 6` and the asymptotic series.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x + x2 / 2.0 + (1.0 / x) * x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

/// Solves `ln p - digamma(p) = s` for the gamma shape.
pub fn gamma_shape(s: f64) -> (f64, bool, usize) {
    let mut p = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for it in 0..100 {
        let g = p.ln() - digamma(p) - s;
        let d = 1.0 / p - trigamma(p);
        let mut next = p - g / d;
        if !(next > 0.0) || !next.is_finite() {
            next = 0.5 * p;
        }
        if (next - p).abs() <= 1e-13 * p {
            return (next, true, it + 1);
        }
        p = next;
    }
    (p, false, 100)
}

fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Generic two-component EM. `comp_logpdf(k, params, x)`; `m_step` refits a
/// component from responsibilities. Parameters are `[p1, a1, b1, p2, a2, b2]`.
fn em_two<R, L, M>(
    x: &[f64],
    rng: &mut R,
    opts: &FitOptions,
    warm: Option<&[f64]>,
    circular: bool,
    init: impl Fn(&mut R) -> Vec<f64>,
    comp_logpdf: L,
    m_step: M,
) -> Result<(Vec<f64>, usize, bool)>
where
    R: Rng + ?Sized,
    L: Fn(f64, f64, f64) -> f64,
    M: Fn(&[f64], &[f64]) -> Option<(f64, f64)>,
{
    let n = x.len();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm {
        starts.push(w.to_vec());
    }
    for _ in 0..opts.em_restarts {
        starts.push(init(rng));
    }
    let mut best: Option<(f64, Vec<f64>, usize, bool)> = None;
    let mut total_iter = 0;
    for start in starts {
        let mut p = start;
        let mut prev = f64::NEG_INFINITY;
        let mut ok = false;
        let mut r1 = vec![0.0; n];
        let mut r2 = vec![0.0; n];
        let mut ll = f64::NEG_INFINITY;
        for _ in 0..opts.em_max_iter {
            total_iter += 1;
            ll = 0.0;
            for i in 0..n {
                let a = p[0].ln() + comp_logpdf(x[i], p[1], p[2]);
                let b = p[3].ln() + comp_logpdf(x[i], p[4], p[5]);
                let t = log_sum_exp2(a, b);
                ll += t;
                r1[i] = (a - t).exp();
                r2[i] = (b - t).exp();
            }
            if !ll.is_finite() {
                break;
            }
            if (ll - prev).abs() < opts.em_tol {
                ok = true;
                break;
            }
            prev = ll;
            let w1: f64 = r1.iter().sum::<f64>() / n as f64;
            let (Some(c1), Some(c2)) = (m_step(x, &r1), m_step(x, &r2)) else {
                ll = f64::NEG_INFINITY;
                break;
            };
            if !(w1 > 1e-6 && w1 < 1.0 - 1e-6) {
                ll = f64::NEG_INFINITY;
                break;
            }
            p = vec![w1, c1.0, c1.1, 1.0 - w1, c2.0, c2.1];
        }
        if ll.is_finite() && best.as_ref().is_none_or(|b| ll > b.0) {
            best = Some((ll, p, 0, ok));
        }
    }
    let Some((ll_em, p_em, _, ok_em)) = best else {
        return Err(Error::DegenerateSample("every EM restart degenerated".into()));
    };
    // EM converges linearly near the optimum; finish with a direct search
    // over (logit w, a1, ln b1, a2, ln b2).
    let loglik = |q: &[f64]| -> f64 {
        let w = 1.0 / (1.0 + (-q[0]).exp());
        let (b1, b2) = (q[2].exp(), q[4].exp());
        if !(w > 0.0 && w < 1.0 && b1.is_finite() && b2.is_finite() && b1 > 0.0 && b2 > 0.0) {
            return f64::NEG_INFINITY;
        }
        x.iter()
            .map(|&v| log_sum_exp2(w.ln() + comp_logpdf(v, q[1], b1), (1.0 - w).ln() + comp_logpdf(v, q[3], b2)))
            .sum()
    };
    let q0 = [logit(p_em[0]), p_em[1], p_em[2].ln(), p_em[4], p_em[5].ln()];
    let m = nelder_mead(
        |q| {
            let v = -loglik(q);
            if v.is_nan() { f64::INFINITY } else { v }
        },
        &q0,
        &opts.nelder_mead,
    );
    total_iter += m.evals;
    if !(-m.value >= ll_em) {
        return Ok((p_em, total_iter, ok_em));
    }
    let w = 1.0 / (1.0 + (-m.x[0]).exp());
    let wrap = |a: f64| if circular { a.rem_euclid(TAU) } else { a };
    Ok((vec![w, wrap(m.x[1]), m.x[2].exp(), 1.0 - w, wrap(m.x[3]), m.x[4].exp()], total_iter, m.converged || ok_em))
}

fn em_vm_mixture<R: Rng + ?Sized>(
    theta: &[f64],
    rng: &mut R,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> Result<(Vec<f64>, usize, bool)> {
    let n = theta.len();
    em_two(
        theta,
        rng,
        opts,
        warm,
        true,
        |rng: &mut R| {
            let a = theta[rng.random_range(0..n)];
            let b = theta[rng.random_range(0..n)];
            vec![0.5, a, 1.0, 0.5, b, 1.0]
        },
        |t, mu, kappa| kappa * ((t - mu).cos() - 1.0) - crate::models::circular::vm_log_norm(kappa),
        |t, r| {
            let (mu, kappa, _, _) = von_mises_weighted(t, Some(r));
            (kappa.is_finite() && kappa < KAPPA_CAP).then_some((mu, kappa))
        },
    )
}

fn em_normal_mixture<R: Rng + ?Sized>(
    z: &[f64],
    rng: &mut R,
    opts: &FitOptions,
    warm: Option<&[f64]>,
) -> Result<(Vec<f64>, usize, bool)> {
    let n = z.len();
    let mean = z.iter().sum::<f64>() / n as f64;
    let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let floor = 1e-6 * sd.max(1e-300);
    em_two(
        z,
        rng,
        opts,
        warm,
        false,
        |rng: &mut R| {
            let a = z[rng.random_range(0..n)];
            let b = z[rng.random_range(0..n)];
            vec![0.5, a, sd, 0.5, b, sd]
        },
        |v, m, s| {
            let u = (v - m) / s;
            -0.5 * u * u - s.ln() - 0.5 * TAU.ln()
        },
        |z, r| {
            let w: f64 = r.iter().sum();
            if w <= 0.0 {
                return None;
            }
            let m = z.iter().zip(r).map(|(v, r)| v * r).sum::<f64>() / w;
            let s = (z.iter().zip(r).map(|(v, r)| r * (v - m) * (v - m)).sum::<f64>() / w).sqrt();
            (s > floor).then_some((m, s))
        },
    )
}

/// ML concentration of a wrapped Cauchy with fixed location.
pub fn fit_wrapped_cauchy_rho(psi: &[f64], mu: f64) -> (f64, f64) {
    let nll = |rho: f64| {
        let d = CircularDensity::wrapped_cauchy(mu, rho).expect("rho inside [0, 1)");
        -circular_loglik(&d, psi)
    };
    golden_section(nll, 0.0, 1.0 - 1e-9, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normal_two_point() {
        let r = fit_linear(LinearFamily::Normal, &[-1.0, 1.0], &mut ChaCha8Rng::seed_from_u64(0), &FitOptions::default(), None)
            .unwrap();
        assert_eq!(r.theta_hat, vec![0.0, 1.0]);
        assert_eq!(r.method, FitMethod::ClosedForm);
    }

    #[test]
    fn a1_inverse_round_trip() {
        for &k in &[0.01, 0.5, 2.0, 10.0, 300.0] {
            let (kk, ok, _) = inverse_a1(bessel_ratio(0.0, k));
            assert!(ok);
            assert!((kk - k).abs() < 1e-8 * k.max(1.0), "{k} -> {kk}");
        }
        assert_eq!(inverse_a1(1.0).0, KAPPA_CAP);
        assert!(!inverse_a1(1.0).1);
    }

    #[test]
    fn trigamma_values() {
        // psi'(1) = pi^2/6, psi'(1/2) = pi^2/2
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((trigamma(1.0) - pi2 / 6.0).abs() < 1e-12);
        assert!((trigamma(0.5) - pi2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_shape_round_trip() {
        for &p in &[0.3f64, 1.0, 3.0, 50.0] {
            let s = p.ln() - digamma(p);
            let (pp, ok, _) = gamma_shape(s);
            assert!(ok && (pp - p).abs() < 1e-9 * p, "{p} -> {pp}");
        }
    }

    #[test]
    fn log_families_reject_nonpositive_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(fit_linear(LinearFamily::LogNormal, &[1.0, 0.0, 2.0], &mut rng, &FitOptions::default(), None).is_err());
        assert!(fit_linear(LinearFamily::Gamma, &[1.0, -2.0], &mut rng, &FitOptions::default(), None).is_err());
        assert!(matches!(
            fit_linear(LinearFamily::Normal, &[1.0], &mut rng, &FitOptions::default(), None),
            Err(Error::InsufficientData { .. })
        ));
    }
}
