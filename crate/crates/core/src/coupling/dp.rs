//! Exact expectations of pre-coupling sums.
//!
//! For a pair weight `g`, a rate `r` and a stopping rule, the quantity is
//! `E_{x,x',0}[Σ_{n<stop} r(n) g(X_n, X'_n)]`. It is computed either forward
//! from one start or backward for every start at once, truncated at a
//! horizon `N`. The remainder is bounded by `r(N) E[L(X_N, X'_N); alive]`
//! with `L` one of the lemma bounds, which dominates the expected remaining
//! sum from any live pair because `r(N + m) ≤ r(N) r(m)` and the shifted
//! sequence satisfies the same drift conditions.

use alloc::vec;
use alloc::vec::Vec;

use super::kernel::AugmentedSequence;
use crate::constants::{Affine, LemmaBounds};
use crate::ratefn::Rate;
use crate::{Error, Result};

/// Per-pair weight `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairWeight {
    One,
    /// `φ(V̄(x, x'))`.
    PhiVbar,
    /// `1{(x, x') ∈ C̄}`.
    SmallSetIndicator,
}

/// When the sum stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Sum over `n < τ`.
    Tau,
    /// Sum over `n ≤ T₁` (`include_hit`) or `n < T₁`.
    FirstHit { include_hit: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpQuery {
    pub weight: PairWeight,
    pub rate: Rate,
    pub stop: Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpResult {
    /// Truncated sum over `n < steps`.
    pub value: f64,
    /// Upper bound on the remainder.
    pub tail: f64,
    pub steps: usize,
}

/// All-starts result, indexed by pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AllPairs {
    pub values: Vec<f64>,
    pub tails: Vec<f64>,
    pub horizon: usize,
}

/// The function whose expectation at the horizon bounds the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailDominator {
    /// Dominating function of `V̄`.
    pub affine: Affine,
    /// Multiply by `r(N)`.
    pub rate_scaled: bool,
}

/// Picks the lemma bound that dominates the remaining sum for `query`.
pub fn dominator(query: &DpQuery, bounds: &LemmaBounds) -> Result<TailDominator> {
    let scaled = matches!(query.rate, Rate::Poly { .. });
    match (query.weight, query.stop) {
        (PairWeight::PhiVbar, _) if scaled => Err(Error::Unsupported(
            "rate-weighted sums of phi(Vbar) have no dominating bound",
        )),
        // Before τ (and T₁ < τ), Σ φ∘V̄ is bounded by the drift-sum lemma.
        (PairWeight::PhiVbar, _) => Ok(TailDominator {
            affine: bounds.phi_sum(),
            rate_scaled: false,
        }),
        (_, Stop::Tau) => Ok(TailDominator {
            affine: bounds.rate_sum(),
            rate_scaled: scaled,
        }),
        (_, Stop::FirstHit { .. }) => Ok(TailDominator {
            affine: bounds.first_hit_affine(),
            rate_scaled: scaled,
        }),
    }
}

fn weights(aug: &AugmentedSequence, w: PairWeight) -> Vec<f64> {
    match w {
        PairWeight::One => vec![1.0; aug.vbar().len()],
        PairWeight::PhiVbar => aug.phi_vbar().to_vec(),
        PairWeight::SmallSetIndicator => aug
            .in_cbar()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
    }
}

fn rate_factor(dom: &TailDominator, rate: &Rate, n: usize) -> f64 {
    if dom.rate_scaled {
        rate.at(n)
    } else {
        1.0
    }
}

/// Forward computation from one start `(x, x')`.
pub fn dp_expected_sum(
    aug: &AugmentedSequence,
    bounds: &LemmaBounds,
    start: (usize, usize),
    query: &DpQuery,
    tol: f64,
    max_steps: usize,
) -> Result<DpResult> {
    let ns = aug.n_states();
    if start.0 >= ns || start.1 >= ns {
        return Err(Error::DimensionMismatch {
            expected: ns,
            found: start.0.max(start.1) + 1,
        });
    }
    let dom = dominator(query, bounds)?;
    let g = weights(aug, query.weight);
    let l: Vec<f64> = aug.vbar().iter().map(|&v| dom.affine.eval(v)).collect();
    let cbar = aug.in_cbar();
    let mut mu = vec![0.0; ns * ns];
    mu[start.0 * ns + start.1] = 1.0;
    let mut value = 0.0;
    let mut n = 0usize;
    loop {
        let r = query.rate.at(n);
        let mut acc = 0.0;
        match query.stop {
            Stop::Tau => {
                for (m, w) in mu.iter().zip(&g) {
                    acc += m * w;
                }
            }
            Stop::FirstHit { include_hit } => {
                for z in 0..mu.len() {
                    if cbar[z] {
                        if include_hit {
                            acc += mu[z] * g[z];
                        }
                        mu[z] = 0.0;
                    } else {
                        acc += mu[z] * g[z];
                    }
                }
            }
        }
        value += r * acc;
        n += 1;
        let kernel = aug.kernel(n);
        mu = match query.stop {
            Stop::Tau => kernel.push_uncoupled(&mu).0,
            // Live mass sits off C̄, where the step is the product kernel.
            Stop::FirstHit { .. } => kernel.push_uncoupled(&mu).0,
        };
        let live: f64 = mu.iter().zip(&l).map(|(m, v)| m * v).sum();
        let tail = rate_factor(&dom, &query.rate, n) * live;
        if tail == 0.0 || tail <= tol * value {
            return Ok(DpResult {
                value,
                tail,
                steps: n,
            });
        }
        if n >= max_steps {
            return Err(Error::NonConvergence {
                what: "coupled-chain sum",
                steps: n,
            });
        }
    }
}

/// Backward computation for every start at once, doubling the horizon from
/// 64 until each pair has `tail ≤ tol · value`.
pub fn dp_expected_sum_all(
    aug: &AugmentedSequence,
    bounds: &LemmaBounds,
    query: &DpQuery,
    tol: f64,
    max_steps: usize,
) -> Result<AllPairs> {
    let dom = dominator(query, bounds)?;
    let g = weights(aug, query.weight);
    let l: Vec<f64> = aug.vbar().iter().map(|&v| dom.affine.eval(v)).collect();
    let cbar = aug.in_cbar();
    let mut horizon = 64usize.min(max_steps.max(1));
    loop {
        let mut u = vec![0.0; g.len()];
        let mut w = l.clone();
        for n in (0..horizon).rev() {
            let kernel = aug.kernel(n + 1);
            let ku = kernel.apply_uncoupled(&u);
            let kw = kernel.apply_uncoupled(&w);
            let r = query.rate.at(n);
            for z in 0..g.len() {
                let (nu, nw) = match query.stop {
                    Stop::Tau => (r * g[z] + ku[z], kw[z]),
                    Stop::FirstHit { include_hit } if cbar[z] => {
                        (if include_hit { r * g[z] } else { 0.0 }, 0.0)
                    }
                    Stop::FirstHit { .. } => (r * g[z] + ku[z], kw[z]),
                };
                u[z] = nu;
                w[z] = nw;
            }
        }
        let factor = rate_factor(&dom, &query.rate, horizon);
        let tails: Vec<f64> = w.iter().map(|v| factor * v).collect();
        let done = u
            .iter()
            .zip(&tails)
            .all(|(v, t)| *t == 0.0 || *t <= tol * v);
        if done {
            return Ok(AllPairs {
                values: u,
                tails,
                horizon,
            });
        }
        if horizon >= max_steps {
            return Err(Error::NonConvergence {
                what: "coupled-chain sum",
                steps: horizon,
            });
        }
        horizon = (horizon * 2).min(max_steps);
    }
}

/// `K₁ K₂ ⋯ K_N h` for each `h`, with `K_k` the uncoupled part of `P̄_k`.
pub fn backward_power(aug: &AugmentedSequence, hs: &[Vec<f64>], horizon: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = hs.to_vec();
    for k in (1..=horizon).rev() {
        let kernel = aug.kernel(k);
        for h in out.iter_mut() {
            *h = kernel.apply_uncoupled(h);
        }
    }
    out
}
