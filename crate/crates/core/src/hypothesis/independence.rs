//! Independence test calibrated by permutation or by the normal limit.

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::asymptotic::{asymptotic_constants, AsymptoticConstants};
use super::classical::std_normal_cdf;
use super::report::{exceedance_p_value, BandwidthRule, Calibration, TestReport};
use super::statistic::{first_roughness, grid_kernels, indep_statistic_from, second_roughness, statistic_grid, GridSpec};
use crate::error::{Error, Result};
use crate::kde::Bandwidths;
use crate::kernel::KernelPair;
use crate::models::JointSample;
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct IndepOptions {
    pub method: Calibration,
    /// Permutations; ignored by the asymptotic calibration.
    pub b: usize,
    pub seed: u64,
    pub grid: GridSpec,
}

impl Default for IndepOptions {
    fn default() -> Self {
        Self { method: Calibration::Permutation, b: 1000, seed: 0, grid: GridSpec::default() }
    }
}

/// Warning text when `h^q / g` leaves `[0.1, 10]`.
pub fn bandwidth_ratio_warning(bw: &Bandwidths, q: usize) -> Option<String> {
    let r = bw.h.powi(q as i32) / bw.g;
    (!(0.1..=10.0).contains(&r)).then(|| format!("h^q/g = {r:.3} outside [0.1, 10]; the normal limit assumes a bounded ratio"))
}

/// Tests independence of the two coordinates of `sample`.
pub fn indep_test(sample: &JointSample, bw: &Bandwidths, kernel: &KernelPair, opts: &IndepOptions) -> Result<TestReport> {
    let start = Instant::now();
    if sample.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: sample.len() });
    }
    let grid = statistic_grid(sample, bw, &opts.grid)?;
    let gk = grid_kernels(sample, &grid, bw, kernel)?;
    let t_n = indep_statistic_from(&gk, &grid, None);
    let mut warnings = Vec::new();
    let (p_value, b) = match opts.method {
        Calibration::Permutation => {
            if opts.b == 0 {
                return Err(Error::Domain("permutation calibration needs B >= 1".into()));
            }
            let n = sample.len();
            let reps: Vec<f64> = (0..opts.b)
                .into_par_iter()
                .map(|b| {
                    let mut rng = stream(opts.seed, &[b as u64]);
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.shuffle(&mut rng);
                    indep_statistic_from(&gk, &grid, Some(&perm))
                })
                .collect();
            (exceedance_p_value(t_n, &reps), opts.b)
        }
        Calibration::Asymptotic => {
            let c = plug_in_constants(&gk, &grid, sample, bw, kernel)?;
            warnings.extend(bandwidth_ratio_warning(bw, c.q));
            (1.0 - std_normal_cdf(c.standardize(t_n)), 0)
        }
        Calibration::Bootstrap => {
            return Err(Error::Domain("independence is calibrated by permutation or asymptotically".into()))
        }
    };
    Ok(TestReport {
        statistic: t_n,
        p_value,
        method: opts.method,
        b,
        b_requested: opts.b,
        bandwidths: *bw,
        bandwidth_rule: BandwidthRule::Fixed,
        seed: opts.seed,
        fit: None,
        elapsed: start.elapsed(),
        grid_shape: grid.shape(),
        flagged: false,
        warnings,
    })
}

fn plug_in_constants(
    gk: &crate::kde::GridKernels,
    grid: &crate::special::grid::QuadratureGrid,
    sample: &JointSample,
    bw: &Bandwidths,
    kernel: &KernelPair,
) -> Result<AsymptoticConstants> {
    let fx = gk.first_marginal();
    let fz = gk.second_marginal();
    let r_fx = first_roughness(grid, fx.as_slice().expect("contiguous"));
    let r_fz = second_roughness(grid, fz.as_slice().expect("contiguous"));
    asymptotic_constants(r_fx, r_fz, sample.len(), bw, sample.support(), kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kde::DirLinSample;

    #[test]
    fn strong_dependence_is_detected() {
        let theta: Vec<f64> = (0..200).map(|k| k as f64 * 0.031_415_9).collect();
        let z: Vec<f64> = theta.iter().enumerate().map(|(k, t)| t.cos() + 1e-3 * (k % 7) as f64).collect();
        let s = JointSample::CircleLine(DirLinSample::from_angles(&theta, &z).unwrap());
        let bw = Bandwidths::new(0.3, 0.2).unwrap();
        let opts = IndepOptions { b: 200, seed: 3, ..Default::default() };
        let r = indep_test(&s, &bw, &KernelPair::default(), &opts).unwrap();
        assert!(r.p_value <= 0.01, "{}", r.p_value);
        let a = indep_test(&s, &bw, &KernelPair::default(), &IndepOptions { method: Calibration::Asymptotic, ..opts }).unwrap();
        assert!(a.p_value < 0.01);
    }

    #[test]
    fn bootstrap_calibration_is_rejected() {
        let s = JointSample::CircleLine(DirLinSample::from_angles(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap());
        let bw = Bandwidths::new(0.3, 0.2).unwrap();
        let opts = IndepOptions { method: Calibration::Bootstrap, ..Default::default() };
        assert!(indep_test(&s, &bw, &KernelPair::default(), &opts).is_err());
    }
}
