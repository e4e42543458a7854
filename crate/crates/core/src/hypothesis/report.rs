//! Test outcomes as key-value text and CSV rows.

use std::fmt;
use std::time::Duration;

use crate::inference::FitResult;
use crate::kde::Bandwidths;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Calibration {
    Bootstrap,
    Permutation,
    Asymptotic,
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calibration::Bootstrap => "bootstrap",
            Calibration::Permutation => "permutation",
            Calibration::Asymptotic => "asymptotic",
        })
    }
}

impl std::str::FromStr for Calibration {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "bootstrap" => Ok(Calibration::Bootstrap),
            "permutation" => Ok(Calibration::Permutation),
            "asymptotic" => Ok(Calibration::Asymptotic),
            other => Err(crate::Error::Domain(format!("unknown calibration `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandwidthRule {
    Fixed,
    Lcv,
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandwidthRule::Fixed => "fixed",
            BandwidthRule::Lcv => "LCV",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub statistic: f64,
    /// In `[0, 1]`.
    pub p_value: f64,
    pub method: Calibration,
    /// Replicates that entered the p-value.
    pub b: usize,
    pub b_requested: usize,
    pub bandwidths: Bandwidths,
    pub bandwidth_rule: BandwidthRule,
    pub seed: u64,
    pub fit: Option<FitResult>,
    pub elapsed: Duration,
    pub grid_shape: (usize, usize),
    /// Set when more than a tenth of the replicates failed.
    pub flagged: bool,
    pub warnings: Vec<String>,
}

impl TestReport {
    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "statistic={:?}\np_value={:?}\nmethod={}\nB={}\nB_requested={}\nh={:?}\ng={:?}\nbandwidth_rule={}\nseed={}\ngrid={}x{}\nflagged={}\nelapsed_s={:?}\n",
            self.statistic,
            self.p_value,
            self.method,
            self.b,
            self.b_requested,
            self.bandwidths.h,
            self.bandwidths.g,
            self.bandwidth_rule,
            self.seed,
            self.grid_shape.0,
            self.grid_shape.1,
            self.flagged,
            self.elapsed.as_secs_f64(),
        );
        for w in &self.warnings {
            s.push_str(&format!("warning={w}\n"));
        }
        s
    }

    pub fn csv_header() -> &'static str {
        "statistic,p_value,method,B,B_requested,h,g,bandwidth_rule,seed,grid_first,grid_second,flagged,fit_log_likelihood,fit_converged,elapsed_s"
    }

    pub fn to_csv_row(&self) -> String {
        let (ll, conv) = match &self.fit {
            Some(f) => (format!("{:.17e}", f.log_likelihood), f.converged.to_string()),
            None => (String::new(), String::new()),
        };
        format!(
            "{:.17e},{:.17e},{},{},{},{:.17e},{:.17e},{},{},{},{},{},{},{},{:.6}",
            self.statistic,
            self.p_value,
            self.method,
            self.b,
            self.b_requested,
            self.bandwidths.h,
            self.bandwidths.g,
            self.bandwidth_rule,
            self.seed,
            self.grid_shape.0,
            self.grid_shape.1,
            self.flagged,
            ll,
            conv,
            self.elapsed.as_secs_f64()
        )
    }
}

/// `#{stat <= r*} / B`, the exceedance proportion.
pub fn exceedance_p_value(statistic: f64, replicates: &[f64]) -> f64 {
    if replicates.is_empty() {
        return f64::NAN;
    }
    replicates.iter().filter(|&&r| statistic <= r).count() as f64 / replicates.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion() {
        assert_eq!(exceedance_p_value(1.0, &[0.5, 0.2, 0.9]), 0.0);
        assert_eq!(exceedance_p_value(1.0, &[1.0]), 1.0);
        assert_eq!(exceedance_p_value(1.0, &[2.0, 0.0, 3.0, 0.5]), 0.5);
    }

    #[test]
    fn csv_row_matches_header_width() {
        let r = TestReport {
            statistic: 0.1,
            p_value: 0.5,
            method: Calibration::Permutation,
            b: 10,
            b_requested: 10,
            bandwidths: Bandwidths { h: 0.2, g: 0.3 },
            bandwidth_rule: BandwidthRule::Fixed,
            seed: 1,
            fit: None,
            elapsed: Duration::from_millis(3),
            grid_shape: (128, 96),
            flagged: false,
            warnings: vec![],
        };
        assert_eq!(r.to_csv_row().split(',').count(), TestReport::csv_header().split(',').count());
        assert!(r.to_text().contains("method=permutation\n"));
    }
}
