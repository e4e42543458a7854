//! Parametric bootstrap calibration of the goodness-of-fit statistic.
//!
//! 1. fit `theta_hat` (skipped for a simple null),
//! 2. compute `R_n` against `LK f_theta_hat`,
//! 3. for each replicate draw `n` points from `f_theta_hat`, refit and
//!    recompute the statistic,
//! 4. report `#{R_n <= R*} / B`.
//!
//! Bandwidths and the statistic grid come from the observed sample and stay
//! fixed across replicates unless per-replicate LCV is requested.

use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use super::lcv::{lcv_bandwidths, SearchBox};
use super::report::{exceedance_p_value, BandwidthRule, Calibration, TestReport};
use super::statistic::{grid_kernels, gof_statistic_from, smooth_model, statistic_grid, GridSpec};
use crate::error::{Error, Result};
use crate::inference::{fit_joint, FitOptions, FitResult, NelderMeadOptions};
use crate::kde::{Bandwidths, GridSmoother};
use crate::kernel::KernelPair;
use crate::models::{sample_joint, JointModel, JointSample};
use crate::rng::stream;
use crate::special::grid::QuadratureGrid;

/// Largest failed-replicate share tolerated without flagging the report.
pub const MAX_FAILED_SHARE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct GofOptions {
    pub b: usize,
    pub seed: u64,
    pub grid: GridSpec,
    /// Fit of the observed sample.
    pub fit: FitOptions,
    /// Bootstrap refits, warm-started at the observed estimate.
    pub refit: FitOptions,
    /// Known parameter of a simple null; disables fitting.
    pub simple_theta0: Option<Vec<f64>>,
    /// Re-select bandwidths by LCV inside every replicate.
    pub lcv_per_replicate: Option<SearchBox>,
}

impl Default for GofOptions {
    fn default() -> Self {
        Self {
            b: 1000,
            seed: 0,
            grid: GridSpec::default(),
            fit: FitOptions::default(),
            refit: bootstrap_refit_options(),
            simple_theta0: None,
            lcv_per_replicate: None,
        }
    }
}

/// Lighter optimizer budget for warm-started refits.
pub fn bootstrap_refit_options() -> FitOptions {
    FitOptions {
        nelder_mead: NelderMeadOptions { restarts: 1, f_tol: 1e-9, x_tol: 1e-6, ..NelderMeadOptions::default() },
        em_restarts: 2,
        em_max_iter: 50,
        ..FitOptions::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GofOutcome {
    pub report: TestReport,
    /// Statistics of the successful replicates in replicate order.
    pub replicates: Vec<f64>,
    pub null_model: JointModel,
}

struct Statistic<'a> {
    grid: QuadratureGrid,
    smoother: GridSmoother,
    bw: Bandwidths,
    kernel: &'a KernelPair,
}

impl Statistic<'_> {
    fn smoothed(&self, model: &JointModel) -> Result<Array2<f64>> {
        smooth_model(model, &self.smoother)
    }

    fn eval(&self, sample: &JointSample, smoothed: &Array2<f64>) -> Result<f64> {
        let fhat = grid_kernels(sample, &self.grid, &self.bw, self.kernel)?.joint();
        Ok(gof_statistic_from(&fhat, smoothed, &self.grid))
    }
}

fn build<'a>(sample: &JointSample, bw: &Bandwidths, kernel: &'a KernelPair, spec: &GridSpec) -> Result<Statistic<'a>> {
    let grid = statistic_grid(sample, bw, spec)?;
    let smoother = GridSmoother::new(&grid, bw, kernel)?;
    Ok(Statistic { grid, smoother, bw: *bw, kernel })
}

pub fn gof_bootstrap_test(
    sample: &JointSample,
    template: &JointModel,
    bw: &Bandwidths,
    kernel: &KernelPair,
    opts: &GofOptions,
) -> Result<TestReport> {
    gof_bootstrap(sample, template, bw, kernel, opts).map(|o| o.report)
}

/// Bootstrap test returning the replicate statistics as well.
pub fn gof_bootstrap(
    sample: &JointSample,
    template: &JointModel,
    bw: &Bandwidths,
    kernel: &KernelPair,
    opts: &GofOptions,
) -> Result<GofOutcome> {
    let start = Instant::now();
    if opts.b == 0 {
        return Err(Error::Domain("bootstrap calibration needs B >= 1".into()));
    }
    if template.support() != sample.support() {
        return Err(Error::SupportMismatch {
            expected: format!("{} sample for {}", template.support(), template.id()),
            found: format!("{} sample", sample.support()),
        });
    }
    let n = sample.len();
    let mut rng = stream(opts.seed, &[u64::MAX]);
    let (null_model, fit): (JointModel, Option<FitResult>) = match &opts.simple_theta0 {
        Some(t0) => (template.with_theta(t0)?, None),
        None => {
            let r = fit_joint(template, sample, &mut rng, &opts.fit, None)?;
            (template.with_theta(&r.theta_hat)?, Some(r))
        }
    };
    let stat = build(sample, bw, kernel, &opts.grid)?;
    let smoothed = stat.smoothed(&null_model)?;
    let r_n = stat.eval(sample, &smoothed)?;
    let warm = fit.as_ref().map(|f| f.theta_hat.clone());

    let replicate = |b: usize| -> Option<f64> {
        let mut rng = stream(opts.seed, &[b as u64]);
        let s = sample_joint(&null_model, n, &mut rng).ok()?;
        let model_b = match &warm {
            Some(w) => {
                let r = fit_joint(template, &s, &mut rng, &opts.refit, Some(w)).ok()?;
                if !r.converged {
                    return None;
                }
                template.with_theta(&r.theta_hat).ok()?
            }
            None => null_model.clone(),
        };
        match &opts.lcv_per_replicate {
            Some(search) => {
                let bw_b = lcv_bandwidths(&s, kernel, search).ok()?.bw;
                let st = build(&s, &bw_b, kernel, &opts.grid).ok()?;
                let sm = st.smoothed(&model_b).ok()?;
                st.eval(&s, &sm).ok()
            }
            None if warm.is_none() => stat.eval(&s, &smoothed).ok(),
            None => {
                let sm = stat.smoothed(&model_b).ok()?;
                stat.eval(&s, &sm).ok()
            }
        }
        .filter(|v| v.is_finite())
    };
    let results: Vec<Option<f64>> = (0..opts.b).into_par_iter().map(replicate).collect();
    let replicates: Vec<f64> = results.iter().flatten().copied().collect();
    let failed = opts.b - replicates.len();
    let mut warnings = Vec::new();
    let flagged = failed as f64 > MAX_FAILED_SHARE * opts.b as f64;
    if failed > 0 {
        warnings.push(format!("{failed} of {} bootstrap replicates failed and were dropped", opts.b));
    }
    if replicates.is_empty() {
        return Err(Error::Numerical("every bootstrap replicate failed".into()));
    }
    let report = TestReport {
        statistic: r_n,
        p_value: exceedance_p_value(r_n, &replicates),
        method: Calibration::Bootstrap,
        b: replicates.len(),
        b_requested: opts.b,
        bandwidths: *bw,
        bandwidth_rule: if opts.lcv_per_replicate.is_some() { BandwidthRule::Lcv } else { BandwidthRule::Fixed },
        seed: opts.seed,
        fit,
        elapsed: start.elapsed(),
        grid_shape: stat.grid.shape(),
        flagged,
        warnings,
    };
    Ok(GofOutcome { report, replicates, null_model })
}
