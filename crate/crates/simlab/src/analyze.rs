//! End-to-end analysis of a dataset: LCV bandwidths, fit, bootstrap
//! goodness-of-fit test, summary text and a fitted-density plot.

use std::f64::consts::TAU;
use std::fmt::Write;
use std::path::Path;

use dirlin::hypothesis::{gof_bootstrap_test, lcv_bandwidths, BandwidthRule, GofOptions, GridSpec, LcvResult, SearchBox, TestReport};
use dirlin::kde::Bandwidths;
use dirlin::kernel::KernelPair;
use dirlin::models::{JointModel, JointSample};
use dirlin::special::Support;

use crate::data::read_dataset;
use crate::error::{SimError, SimResult};
use crate::svg::density_plot;

const PLOT_NODES: usize = 96;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub b: usize,
    pub seed: u64,
    pub degrees: bool,
    pub grid: GridSpec,
    /// Skips LCV when set.
    pub bandwidths: Option<Bandwidths>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { b: 1000, seed: 1, degrees: false, grid: GridSpec::default(), bandwidths: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub sample: JointSample,
    pub report: TestReport,
    pub fitted: JointModel,
    pub lcv: Option<LcvResult>,
    pub warnings: Vec<String>,
}

pub fn analyze_dataset(path: &Path, template: &JointModel, opts: &AnalyzeOptions) -> SimResult<Analysis> {
    let data = read_dataset(path, template.support(), opts.degrees)?;
    let mut a = analyze_sample(data.sample, template, opts)?;
    a.warnings.splice(0..0, data.warnings);
    Ok(a)
}

pub fn analyze_sample(sample: JointSample, template: &JointModel, opts: &AnalyzeOptions) -> SimResult<Analysis> {
    if sample.support() != template.support() {
        return Err(dirlin::Error::SupportMismatch {
            expected: format!("{} data for {}", template.support(), template.id()),
            found: format!("{} data", sample.support()),
        }
        .into());
    }
    let kernel = KernelPair::default();
    let (bw, lcv) = match opts.bandwidths {
        Some(bw) => (bw, None),
        None => {
            let r = lcv_bandwidths(&sample, &kernel, &SearchBox::for_sample(&sample))?;
            (r.bw, Some(r))
        }
    };
    let gof = GofOptions { b: opts.b, seed: opts.seed, grid: opts.grid, ..GofOptions::default() };
    let mut report = gof_bootstrap_test(&sample, template, &bw, &kernel, &gof)?;
    if lcv.is_some() {
        report.bandwidth_rule = BandwidthRule::Lcv;
    }
    let fit = report.fit.as_ref().ok_or_else(|| SimError::Numeric("the composite test returned no fit".into()))?;
    let fitted = template.with_theta(&fit.theta_hat)?;
    let mut warnings = Vec::new();
    if let Some(r) = &lcv {
        if r.boundary {
            warnings.push("LCV optimum lies on the search-box boundary".into());
        }
    }
    if !fit.converged {
        warnings.push("maximum-likelihood fit did not converge".into());
    }
    Ok(Analysis { sample, report, fitted, lcv, warnings })
}

impl Analysis {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model={}", self.fitted.id());
        let _ = writeln!(s, "n={}", self.sample.len());
        for (name, v) in self.fitted.params() {
            let _ = writeln!(s, "fitted.{name}={v:.6}");
        }
        if let Some(r) = &self.lcv {
            let _ = writeln!(s, "lcv.value={:.6}", r.value);
            let _ = writeln!(s, "lcv.boundary={}", r.boundary);
        }
        s.push_str(&self.report.to_text());
        for w in &self.warnings {
            let _ = writeln!(s, "warning={w}");
        }
        let verdict = if self.report.p_value < 0.05 { "evidence against" } else { "no evidence against" };
        let _ = writeln!(s, "conclusion={verdict} the {} family at level 0.05", self.fitted.id());
        s
    }

    /// Fitted density over the data window with the observations overlaid.
    pub fn density_svg(&self) -> SimResult<String> {
        let xs: Vec<f64> = (0..PLOT_NODES).map(|i| (i as f64 + 0.5) * TAU / PLOT_NODES as f64).collect();
        let (ys, label) = match self.sample.support() {
            Support::CircleCircle => (xs.clone(), "psi"),
            _ => {
                let z = self.sample.second();
                let lo = z.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let pad = 0.1 * (hi - lo).max(1e-6);
                let (a, b) = (lo - pad, hi + pad);
                ((0..PLOT_NODES).map(|j| a + (b - a) * j as f64 / (PLOT_NODES - 1) as f64).collect(), "z")
            }
        };
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                values.push(self.fitted.pdf(x, y));
            }
        }
        let points: Vec<(f64, f64)> = self.sample.theta().into_iter().zip(self.sample.second()).collect();
        let title = format!("fitted {} density, p = {:.3}", self.fitted.id(), self.report.p_value);
        Ok(density_plot(&values, &xs, &ys, &points, "theta", label, &title))
    }
}
