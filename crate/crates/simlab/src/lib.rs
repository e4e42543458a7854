//! Simulation laboratory for the directional-linear density tests: Monte
//! Carlo size/power tables, bandwidth surfaces, CLT checks and dataset
//! analysis.

pub mod analyze;
pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod output;
pub mod svg;

pub use error::{SimError, SimResult};
