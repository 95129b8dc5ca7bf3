//! The six time-series families: parameter validation, theoretical tail
//! metadata, and deterministic simulation of `(X_0, ..., X_h)` blocks.
//!
//! Each family knows its marginal right tail index `alpha` and its
//! conditional scaling exponents `kappa_h`, which downstream experiments use
//! as ground truth. Simulation draws the time-zero state from the exact
//! truncated-series stationary law (the switching model intentionally starts
//! from its Pareto initial law instead), so no burn-in is involved.

mod block;
mod sim;
mod spec;

pub use block::{read_block_csv, write_block_csv, BlockMeta, PathBlock};
pub use sim::{
    expar1_path_from_innovations, explinear_path_from_innovations, simulate_block,
    simulate_rows_range, switching_path_from_innovations,
};
pub use spec::{default_truncation, CoeffRule, ModelSpec, ZLaw};

pub(crate) use sim::ROW_CHUNK;
