//! Maximum likelihood fitting of marginal and joint models.

pub mod joint;
pub mod marginal;
pub mod optim;

use std::fmt;

pub use joint::{fit_cl10, fit_joint, fit_model, log_likelihood, moment_estimate};
pub use marginal::{fit_circular, fit_linear, inverse_a1, mean_direction, KAPPA_CAP};
pub use optim::{nelder_mead, Minimum, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitMethod {
    ClosedForm,
    Newton1D,
    NelderMead,
    TwoStep,
    Em,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::ClosedForm => "closedForm",
            FitMethod::Newton1D => "newton1D",
            FitMethod::NelderMead => "nelderMead",
            FitMethod::TwoStep => "twoStep",
            FitMethod::Em => "em",
        })
    }
}

impl FitMethod {
    /// Method reported for a product of independently fitted parts.
    fn combine(self, other: FitMethod) -> FitMethod {
        let rank = |m: FitMethod| match m {
            FitMethod::ClosedForm => 0,
            FitMethod::Newton1D => 1,
            FitMethod::NelderMead => 2,
            FitMethod::Em => 3,
            FitMethod::TwoStep => 4,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub nelder_mead: NelderMeadOptions,
    pub em_restarts: usize,
    pub em_max_iter: usize,
    pub em_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { nelder_mead: NelderMeadOptions::default(), em_restarts: 10, em_max_iter: 200, em_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Estimate in the model's parameter layout.
    pub theta_hat: Vec<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub method: FitMethod,
}

impl FitResult {
    /// `key=value` lines, parameter names supplied by the model.
    pub fn to_text(&self, names: &[String]) -> String {
        let mut s = String::new();
        for (k, v) in names.iter().zip(&self.theta_hat) {
            s.push_str(&format!("fit.{k}={v:?}\n"));
        }
        s.push_str(&format!(
            "fit.log_likelihood={:?}\nfit.converged={}\nfit.iterations={}\nfit.method={}\n",
            self.log_likelihood, self.converged, self.iterations, self.method
        ));
        s
    }
}
