//! The coupled chain on `X × X × {0, 1}`.
//!
//! Off `C̄ = C × C` both coordinates move independently under `P_k`. On `C̄`
//! they couple with probability `ε_ν` (jumping together to a draw from `ν_k`)
//! and otherwise move independently under the residual kernel
//! `Q_k = (P_k - ε_ν ν_k)/(1 - ε_ν)`. Once coupled they move together.
//!
//! Every pre-coupling expectation only needs the `d = 0` layer, so the
//! dynamic programs here work with sub-probability mass on `n × n` pairs.
//! Pair `(x, x')` is stored at index `x · n + x'`.

mod dp;
mod kernel;
mod sim;

pub use dp::{
    backward_power, dominator, dp_expected_sum, dp_expected_sum_all, AllPairs, DpQuery, DpResult,
    PairWeight, Stop, TailDominator,
};
pub use kernel::{
    build_augmented, marginal_check, AugmentedKernel, AugmentedRow, AugmentedSequence,
    CoupledDistribution,
};
pub use sim::{
    chunk_count, reduce_chunks, simulate, simulate_chunk, simulate_replicate, Moments, Outcome,
    SimStats, CHUNK_SIZE, OUTCOME_LABELS,
};
