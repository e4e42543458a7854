//! Kernel density estimators for linear, directional, directional-linear
//! and directional-directional data.

pub mod estimator;
pub mod expansion;
pub mod loo;
pub mod sample;
pub mod smoothing;

pub use estimator::{
    kde_dirdir, kde_dirdir_grid, kde_directional, kde_dirlin, kde_dirlin_grid, kde_linear, GridKernels,
};
pub use expansion::{bias_variance_expansion, ExpansionPrediction};
pub use loo::{loo_log_likelihood, loo_log_likelihood_dirdir, LooObjective};
pub use sample::{
    Bandwidths, DirDirObservation, DirDirSample, DirLinObservation, DirLinSample, Directions, BANDWIDTH_FLOOR,
};
pub use smoothing::{smooth_density, GridSmoother};
