//! Explicit convergence constants for sub-geometric Markov chains, together
//! with exact checks of every bound on finite state spaces.
//!
//! The crate is `no_std` and only needs `alloc`. It is organised bottom-up:
//!
//! - [`ratefn`]: the drift shape `φ(v) = β v^α`, its antiderivative `H_φ`,
//!   the rate sequence `r(n)` and the transformed drift functions `H_k`.
//! - [`young`]: Young-function pairs and the weighted sup-norm `‖·‖_W`.
//! - [`constants`]: the constant ledger (`b̄`, `M₁`, `c*`, `c`) and the
//!   polynomial-family corollary constants.
//! - [`chain`]: finite kernels, kernel sequences, exact evolution.
//! - [`certify`]: extraction of drift/minorisation certificates from kernels.
//! - [`coupling`]: the augmented coupling chain, exact dynamic programming over
//!   pairs of states, and seeded Monte Carlo.
//! - [`verify`]: machine checks of the bivariate drift, the proof lemmas, the
//!   main bound and its polynomial corollaries.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod certify;
pub mod chain;
pub mod constants;
pub mod coupling;
mod error;
mod float;
pub mod ratefn;
pub mod tolerances;
pub mod verify;
pub mod young;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
