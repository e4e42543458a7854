//! Modified Bessel functions of the first kind, `I_nu(x)`, for real `nu >= 0`
//! and `x >= 0`.
//!
//! Small and moderate arguments use the ascending power series, evaluated
//! relative to its leading term so the exponentially scaled value
//! `exp(-x) I_nu(x)` stays representable. Large arguments (`x > 30` and
//! `x > nu^2`) use the Hankel asymptotic expansion, which is already scaled.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 30.0;

/// A single evaluation of `I_nu(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: f64,
    pub argument: f64,
    /// `I_nu(x)`; `+inf` once it overflows.
    pub value: f64,
    /// `exp(-x) I_nu(x)`, finite for every admissible argument.
    pub scaled_value: f64,
}

/// Evaluates `I_nu(x)` together with its scaled counterpart.
pub fn bessel_i(nu: f64, x: f64) -> Result<BesselEval> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("Bessel order must be >= 0, got {nu}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be >= 0, got {x}")));
    }
    let scaled = bessel_i_scaled(nu, x);
    let value = if x < 700.0 { scaled * x.exp() } else { (scaled.ln() + x).exp() };
    Ok(BesselEval { order: nu, argument: x, value, scaled_value: scaled })
}

/// `exp(-x) I_nu(x)` without argument validation.
pub fn bessel_i_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x > SERIES_LIMIT && x > nu * nu {
        hankel_scaled(nu, x)
    } else {
        log_series(nu, x).map_or(0.0, |(log_lead, sum)| (log_lead - x).exp() * sum)
    }
}

/// `ln I_nu(x)`; `-inf` at `x = 0` for `nu > 0`.
pub fn log_bessel_i(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x > SERIES_LIMIT && x > nu * nu {
        hankel_scaled(nu, x).ln() + x
    } else {
        match log_series(nu, x) {
            Some((log_lead, sum)) => log_lead + sum.ln(),
            None => f64::NEG_INFINITY,
        }
    }
}

/// Ratio `I_{nu+1}(x) / I_nu(x)`, computed from scaled values.
pub fn bessel_ratio(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let num = bessel_i_scaled(nu + 1.0, x);
    let den = bessel_i_scaled(nu, x);
    if den > 0.0 && num.is_finite() {
        num / den
    } else {
        (log_bessel_i(nu + 1.0, x) - log_bessel_i(nu, x)).exp()
    }
}

/// Returns `(ln t0, sum_k t_k / t0)` for the ascending series.
fn log_series(nu: f64, x: f64) -> Option<(f64, f64)> {
    let half = 0.5 * x;
    let log_lead = nu * half.ln() - ln_gamma(nu + 1.0);
    let q = half * half;
    // Terms grow until k ~ x/2 and then decay; accumulate relative to t0 while
    // rescaling whenever the running term grows large.
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut comp = 0.0_f64;
    let mut log_shift = 0.0_f64;
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            comp *= 1e-250;
            log_shift += 250.0 * std::f64::consts::LN_10;
        }
        if term < sum * 1e-17 && k > half {
            break;
        }
        if k > 1e7 {
            break;
        }
    }
    if !(sum > 0.0) {
        return None;
    }
    Some((log_lead + log_shift, sum))
}

fn hankel_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut prev_abs = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (8.0 * kf * x);
        let a = term.abs();
        if a > prev_abs {
            break;
        }
        sum += term;
        if a < 1e-17 * sum.abs() {
            break;
        }
        prev_abs = a;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}
