//! Likelihood cross-validation bandwidths: log-spaced grid scan, then a
//! Nelder–Mead polish in log coordinates clamped to the search box.

use crate::error::{Error, Result};
use crate::inference::{nelder_mead, NelderMeadOptions};
use crate::kde::{Bandwidths, LooObjective, BANDWIDTH_FLOOR};
use crate::kernel::KernelPair;
use crate::models::JointSample;

pub const LCV_GRID: usize = 16;
/// Relative log-distance to an edge that counts as a boundary hit.
const BOUNDARY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub h: (f64, f64),
    pub g: (f64, f64),
}

impl SearchBox {
    pub fn new(h: (f64, f64), g: (f64, f64)) -> Result<Self> {
        for (lo, hi) in [h, g] {
            if !(lo >= BANDWIDTH_FLOOR && hi > lo && hi.is_finite()) {
                return Err(Error::InvalidBandwidth(format!(
                    "search interval [{lo}, {hi}] must be increasing and above {BANDWIDTH_FLOOR}"
                )));
            }
        }
        Ok(Self { h, g })
    }

    /// Directional bandwidths in `[0.02, 2]`; the linear one spans
    /// `[0.02, 2]` sample standard deviations.
    pub fn for_sample(sample: &JointSample) -> Self {
        let dir = (0.02, 2.0);
        match sample {
            JointSample::CircleCircle(_) => Self { h: dir, g: dir },
            JointSample::CircleLine(s) => {
                let z = s.linear();
                let n = z.len().max(1) as f64;
                let m = z.iter().sum::<f64>() / n;
                let sd = (z.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
                let sd = if sd > 0.0 { sd } else { 1.0 };
                Self { h: dir, g: ((0.02 * sd).max(BANDWIDTH_FLOOR), (2.0 * sd).max(2.0 * BANDWIDTH_FLOOR)) }
            }
        }
    }

    fn log_bounds(&self) -> [(f64, f64); 2] {
        [(self.h.0.ln(), self.h.1.ln()), (self.g.0.ln(), self.g.1.ln())]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcvResult {
    pub bw: Bandwidths,
    /// Leave-one-out log-likelihood at `bw`.
    pub value: f64,
    /// Best node of the scan.
    pub grid_argmax: Bandwidths,
    pub grid_value: f64,
    /// Some coordinate sits on an edge of the search box.
    pub boundary: bool,
}

pub fn loo_objective(sample: &JointSample, kernel: &KernelPair) -> Result<LooObjective> {
    match sample {
        JointSample::CircleLine(s) => LooObjective::dirlin(s, kernel),
        JointSample::CircleCircle(s) => LooObjective::dirdir(s, &kernel.directional, &kernel.directional),
    }
}

/// `LCV_GRID` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![(lo * hi).sqrt()];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..m).map(|k| (a + (b - a) * k as f64 / (m - 1) as f64).exp()).collect()
}

pub fn lcv_bandwidths(sample: &JointSample, kernel: &KernelPair, search: &SearchBox) -> Result<LcvResult> {
    if sample.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: sample.len() });
    }
    let obj = loo_objective(sample, kernel)?;
    let hs = log_grid(search.h.0, search.h.1, LCV_GRID);
    let gs = log_grid(search.g.0, search.g.1, LCV_GRID);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &h in &hs {
        for &g in &gs {
            let v = obj.value(&Bandwidths { h, g });
            if v > best.0 {
                best = (v, h, g);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::DegenerateSample("degenerate sample for LCV".into()));
    }
    let bounds = search.log_bounds();
    let clamp = |x: &[f64]| -> (f64, f64) {
        (x[0].clamp(bounds[0].0, bounds[0].1).exp(), x[1].clamp(bounds[1].0, bounds[1].1).exp())
    };
    let f = |x: &[f64]| {
        let (h, g) = clamp(x);
        -obj.value(&Bandwidths { h, g })
    };
    let opts = NelderMeadOptions { max_evals: 400, restarts: 1, initial_step: 0.05, f_tol: 1e-10, x_tol: 1e-6 };
    let m = nelder_mead(f, &[best.1.ln(), best.2.ln()], &opts);
    let (mut h, mut g) = clamp(&m.x);
    let mut value = -m.value;
    if !(value >= best.0) {
        (h, g, value) = (best.1, best.2, best.0);
    }
    let near_edge = |x: f64, (lo, hi): (f64, f64)| {
        let t = BOUNDARY_TOL * (hi - lo);
        x.ln() <= lo + t || x.ln() >= hi - t
    };
    let boundary = near_edge(h, bounds[0]) || near_edge(g, bounds[1]);
    Ok(LcvResult {
        bw: Bandwidths { h, g },
        value,
        grid_argmax: Bandwidths { h: best.1, g: best.2 },
        grid_value: best.0,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints() {
        let v = log_grid(0.1, 10.0, 3);
        assert!((v[0] - 0.1).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-14 && (v[2] - 10.0).abs() < 1e-13);
    }

    #[test]
    fn box_validation() {
        assert!(SearchBox::new((0.5, 0.1), (0.1, 1.0)).is_err());
        assert!(SearchBox::new((0.001, 0.1), (0.1, 1.0)).is_err());
        assert!(SearchBox::new((0.05, 0.1), (0.1, 1.0)).is_ok());
    }
}
