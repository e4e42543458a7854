//! Independence and goodness-of-fit tests with their calibrations.

pub mod asymptotic;
pub mod classical;
pub mod gof;
pub mod independence;
pub mod lcv;
pub mod phi;
pub mod report;
pub mod statistic;

pub use asymptotic::{asymptotic_constants, AsymptoticConstants};
pub use gof::{bootstrap_refit_options, gof_bootstrap, gof_bootstrap_test, GofOptions, GofOutcome};
pub use independence::{indep_test, IndepOptions};
pub use lcv::{lcv_bandwidths, LcvResult, SearchBox};
pub use phi::{compute_phi, PhiDiagnostics};
pub use report::{exceedance_p_value, BandwidthRule, Calibration, TestReport};
pub use statistic::{
    gof_statistic, grid_kernels, indep_statistic, smooth_model, statistic_grid, GridSpec,
};
