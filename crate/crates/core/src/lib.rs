//! Exact arithmetic toolkit for trading nodes against diagonal insertions in
//! invariant tensors, with the loop-matrix spectral machinery behind it.

pub mod appendix;
pub mod cohomology;
pub mod error;
pub mod gw_oracle;
pub mod linalg;
pub mod loop_matrix;
pub mod node_trade;
pub mod pairings;
pub mod partitions;
pub mod rational;
pub mod stable_graphs;
pub mod tensor_oracle;

pub use error::{Error, Result};
pub use rational::Rational;

/// Default ceiling on n for anything that materialises the pairing basis.
pub const DEFAULT_MAX_N: usize = 5;

/// The active ceiling: `NODAL_TRADE_MAX_N` if set to a positive integer,
/// otherwise [`DEFAULT_MAX_N`].
pub fn desk_ceiling() -> usize {
    std::env::var("NODAL_TRADE_MAX_N")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_MAX_N)
}

pub(crate) fn check_desk_scale(n: usize) -> Result<()> {
    let max = desk_ceiling();
    if n > max {
        return Err(Error::Resource(format!(
            "n = {n} exceeds the ceiling n <= {max} (set NODAL_TRADE_MAX_N to override)"
        )));
    }
    Ok(())
}
