//! Monte Carlo experiments. Each replicate draws from its own stream keyed by
//! experiment, model, n, delta and replicate index, so results do not depend
//! on scheduling.

pub mod bandwidth_grid;
pub mod clt;
pub mod constants;
pub mod size_power;

pub use bandwidth_grid::{run_bandwidth_grid, sample_digest, write_bandwidth_grid, BandwidthGridOutput, SampleDigest, SurfaceCell};
pub use clt::{run_clt, write_clt, CltOutput, CltSummary};
pub use constants::{constants_table, run_constants_check, ConstantCheck};
pub use size_power::{run_size_power, write_size_power, ReplicateRecord, SizePowerOutput};
