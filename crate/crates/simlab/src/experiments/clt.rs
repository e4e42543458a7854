//! Finite-sample distribution of the standardized independence statistic
//! `n (h g)^{1/2} (T_n - A_n)` against its normal limit `N(0, 2 sigma_I^2)`.

use std::path::Path;

use rayon::prelude::*;

use dirlin::hypothesis::classical::{ks_test, std_normal_cdf, KsResult};
use dirlin::hypothesis::{asymptotic_constants, indep_statistic, statistic_grid, AsymptoticConstants};
use dirlin::kde::Bandwidths;
use dirlin::kernel::KernelPair;
use dirlin::models::{make_model, sample_joint, JointModel, ModelId};
use dirlin::rng::{label, stream};
use dirlin::special::vmf_squared_norm;
use dirlin::special::Support;

use crate::config::ExperimentConfig;
use crate::error::{SimError, SimResult};
use crate::output::{fmt_f64, write_table};

pub const CLT_KAPPA: f64 = 1.0;
pub const HISTOGRAM_BINS: usize = 30;

/// `vM(kappa = 1) x N(0, 1)`.
pub fn clt_model() -> dirlin::Result<JointModel> {
    make_model(ModelId::Cl(1), &[("x.kappa", CLT_KAPPA), ("z.m", 0.0), ("z.sigma", 1.0)])
}

/// `h = g = 2 n^{-1/3}`.
pub fn clt_bandwidths(n: usize) -> Bandwidths {
    let b = 2.0 * (n as f64).powf(-1.0 / 3.0);
    Bandwidths { h: b, g: b }
}

/// Exact roughness of the two marginals.
pub fn clt_roughness() -> dirlin::Result<(f64, f64)> {
    Ok((vmf_squared_norm(CLT_KAPPA, 1)?, 1.0 / (2.0 * std::f64::consts::PI.sqrt())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltSummary {
    pub n: usize,
    pub m: usize,
    pub constants: AsymptoticConstants,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub ks: KsResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltOutput {
    pub summaries: Vec<CltSummary>,
    /// `(n, values)` in replicate order.
    pub values: Vec<(usize, Vec<f64>)>,
}

fn moments(v: &[f64]) -> (f64, f64, f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
    // delta-method standard error of the sample variance
    let var_se = ((m4 - var * var).max(0.0) / m).sqrt();
    (mean, (var / m).sqrt(), var, var_se)
}

pub fn run_clt(cfg: &ExperimentConfig) -> SimResult<CltOutput> {
    cfg.validate()?;
    if cfg.m < 2 {
        return Err(SimError::Usage("the CLT experiment needs M >= 2".into()));
    }
    let kernel = KernelPair::default();
    let model = clt_model()?;
    let (r_fx, r_fz) = clt_roughness()?;
    let mut summaries = Vec::new();
    let mut values = Vec::new();
    for &n in &cfg.n_list {
        let bw = clt_bandwidths(n);
        let constants = asymptotic_constants(r_fx, r_fz, n, &bw, Support::CircleLine, &kernel)?;
        let rate = constants.rate();
        let vals: Vec<f64> = (0..cfg.m)
            .into_par_iter()
            .map(|m| -> dirlin::Result<f64> {
                let mut rng = stream(cfg.master_seed, &[label("cltConvergence"), n as u64, m as u64]);
                let s = sample_joint(&model, n, &mut rng)?;
                let grid = statistic_grid(&s, &bw, &cfg.grid)?;
                let t = indep_statistic(&s, &bw, &kernel, &grid)?;
                Ok(rate * (t - constants.a_n))
            })
            .collect::<dirlin::Result<_>>()?;
        let sd = (2.0 * constants.sigma_i_sq).sqrt();
        let ks = ks_test(&vals, |x| std_normal_cdf(x / sd));
        let (mean, mean_se, variance, variance_se) = moments(&vals);
        summaries.push(CltSummary { n, m: cfg.m, constants, mean, mean_se, variance, variance_se, ks });
        values.push((n, vals));
    }
    Ok(CltOutput { summaries, values })
}

/// Equal-width histogram over the sample range with the limiting density at
/// bin centres: rows of `(lo, hi, count, density, limit_density)`.
pub fn histogram(values: &[f64], sigma_i_sq: f64, bins: usize) -> Vec<(f64, f64, usize, f64, f64)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let var = 2.0 * sigma_i_sq;
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let a = lo + k as f64 * width;
            let mid = a + 0.5 * width;
            let limit = (-0.5 * mid * mid / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
            (a, a + width, c, c as f64 / (values.len() as f64 * width), limit)
        })
        .collect()
}

pub const SUMMARY_HEADER: [&str; 13] =
    ["n", "M", "h", "a_n", "sigma_i_sq", "mean", "mean_se", "variance", "variance_se", "limit_variance", "ks_statistic", "ks_p_value", "seed"];

pub fn write_clt(dir: &Path, out: &CltOutput, seed: u64) -> SimResult<()> {
    let rows: Vec<Vec<String>> = out
        .summaries
        .iter()
        .map(|s| {
            vec![
                s.n.to_string(),
                s.m.to_string(),
                fmt_f64(s.constants.h),
                fmt_f64(s.constants.a_n),
                fmt_f64(s.constants.sigma_i_sq),
                fmt_f64(s.mean),
                fmt_f64(s.mean_se),
                fmt_f64(s.variance),
                fmt_f64(s.variance_se),
                fmt_f64(2.0 * s.constants.sigma_i_sq),
                fmt_f64(s.ks.statistic),
                fmt_f64(s.ks.p_value),
                seed.to_string(),
            ]
        })
        .collect();
    write_table(&dir.join("clt_summary.csv"), &SUMMARY_HEADER, &rows)?;
    let mut vrows = Vec::new();
    let mut hrows = Vec::new();
    for ((n, vals), s) in out.values.iter().zip(&out.summaries) {
        vrows.extend(vals.iter().enumerate().map(|(i, v)| vec![n.to_string(), i.to_string(), fmt_f64(*v)]));
        for (a, b, c, d, l) in histogram(vals, s.constants.sigma_i_sq, HISTOGRAM_BINS) {
            hrows.push(vec![n.to_string(), fmt_f64(a), fmt_f64(b), c.to_string(), fmt_f64(d), fmt_f64(l)]);
        }
    }
    write_table(&dir.join("clt_values.csv"), &["n", "replicate", "standardized"], &vrows)?;
    write_table(&dir.join("clt_histogram.csv"), &["n", "lo", "hi", "count", "density", "limit_density"], &hrows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_every_value() {
        let v: Vec<f64> = (0..100).map(|i| i as f64 / 10.0 - 5.0).collect();
        let h = histogram(&v, 1.0, 7);
        assert_eq!(h.iter().map(|r| r.2).sum::<usize>(), 100);
        let mass: f64 = h.iter().map(|r| r.3 * (r.1 - r.0)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_matches_reference() {
        let (rx, rz) = clt_roughness().unwrap();
        let c = asymptotic_constants(rx, rz, 1000, &clt_bandwidths(1000), Support::CircleLine, &KernelPair::default()).unwrap();
        assert!((c.sigma_i_sq - 2.54e-3).abs() < 1e-5, "{}", c.sigma_i_sq);
    }
}
