//! Classical one-sample tests used for calibration checks.

use statrs::function::gamma::gamma_ur;

pub use crate::models::linear::{normal_cdf, normal_quantile};

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    normal_cdf(x, 0.0, 1.0)
}

/// Upper tail of the Kolmogorov distribution, `P(K > t)`.
pub fn kolmogorov_sf(t: f64) -> f64 {
    // the alternating series converges slowly here and P(K > 0.2) = 1 - 1e-16
    if t < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * t * t).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against a continuous `cdf`, with the
/// `(sqrt(n) + 0.12 + 0.11/sqrt(n)) D` small-sample correction.
pub fn ks_test<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> KsResult {
    let n = data.len();
    let mut u: Vec<f64> = data.iter().map(|&x| cdf(x)).collect();
    u.sort_by(|a, b| a.total_cmp(b));
    let nf = n as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / nf - v).max(v - i as f64 / nf))
        .fold(0.0, f64::max);
    let sn = nf.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d) }
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(0.5 * df, 0.5 * x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of `observed` counts to cell probabilities.
/// Cells with expected count below `min_expected` are pooled.
pub fn chi_square_test(observed: &[u64], probs: &[f64], min_expected: f64) -> ChiSquareResult {
    let n: u64 = observed.iter().sum();
    let total_p: f64 = probs.iter().sum();
    let nf = n as f64;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = nf * p / total_p;
        if e < min_expected {
            pooled_o += o as f64;
            pooled_e += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        cells += 1;
    }
    let df = cells.saturating_sub(1).max(1);
    ChiSquareResult { statistic: stat, df, p_value: chi_square_sf(stat, df as f64) }
}

/// Two-sided binomial band `p0 +- z sqrt(p0 (1 - p0) / m)`.
pub fn binomial_band(p0: f64, m: usize, level: f64) -> (f64, f64) {
    let z = normal_quantile(0.5 + 0.5 * level, 0.0, 1.0);
    let half = z * (p0 * (1.0 - p0) / m as f64).sqrt();
    (p0 - half, p0 + half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_tail_values() {
        // P(K > 1.36) ~ 0.049
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 5e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn chi_square_tail() {
        // df = 2: sf(x) = exp(-x/2)
        assert!((chi_square_sf(3.0, 2.0) - (-1.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn ks_on_perfect_grid_accepts() {
        let data: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let r = ks_test(&data, |x| x);
        assert!((r.statistic - 0.005).abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn band_is_symmetric() {
        let (lo, hi) = binomial_band(0.05, 200, 0.95);
        assert!((0.05 - lo - (hi - 0.05)).abs() < 1e-15);
        assert!((hi - 0.0802).abs() < 1e-3);
    }
}
