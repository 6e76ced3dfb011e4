//! Numerical tolerances shared by every module.
//!
//! All thresholds live in one record so tests and reports agree on them.

/// Tolerance and iteration-budget record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum deviation of a kernel row sum from 1 that is silently repaired.
    pub row_sum: f64,
    /// Absolute tolerance of the adaptive Simpson self-check of `H_φ`.
    pub quadrature_abs: f64,
    /// Absolute residual `|H_φ(t) - u|` targeted by the bisection inverse.
    pub bisection_abs: f64,
    /// Relative truncation tolerance of the `c*` series.
    pub series_rel: f64,
    /// Hard cap on the number of `c*` series terms.
    pub series_max_terms: usize,
    /// Relative truncation tolerance of coupled-chain sums (tail ≤ tol · value).
    pub dp_rel: f64,
    /// Hard cap on the DP horizon.
    pub dp_max_steps: usize,
    /// Relative safety margin subtracted from the maximal admissible `ε_b`.
    pub eps_b_margin: f64,
    /// `ε_b` used when the small set is the whole state space.
    pub eps_b_default: f64,
    /// Slack allowed when re-checking drift inequalities pointwise.
    pub drift_slack: f64,
    /// Per-replicate step cap of the Monte Carlo simulator.
    pub sim_max_steps: u64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        row_sum: 1e-12,
        quadrature_abs: 1e-12,
        bisection_abs: 1e-12,
        series_rel: 1e-10,
        series_max_terms: 1_000_000,
        dp_rel: 1e-10,
        dp_max_steps: 1_000_000,
        eps_b_margin: 1e-9,
        eps_b_default: 0.5,
        drift_slack: 1e-10,
        sim_max_steps: 10_000_000,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
