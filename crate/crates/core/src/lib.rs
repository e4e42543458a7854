pub mod error;
pub mod hypothesis;
pub mod inference;
pub mod kde;
pub mod kernel;
pub mod models;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
