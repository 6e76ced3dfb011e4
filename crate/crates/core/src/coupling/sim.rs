//! Seeded simulation of the coupled chain up to the coupling time.
//!
//! Replicate `i` draws from `ChaCha8` seeded with the master seed on stream
//! `i`, so each trajectory depends only on `(seed, i)`. Replicates are
//! grouped in fixed chunks and the per-chunk moments are merged in a fixed
//! pairwise tree; the result does not depend on how chunks are scheduled.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::AugmentedSequence;
use crate::float::sqrt;
use crate::ratefn::Rate;
use crate::{Error, Result};

/// Replicates per chunk.
pub const CHUNK_SIZE: usize = 1024;

/// Statistics carried per replicate, in order.
pub const OUTCOME_LABELS: [&str; 4] = ["tau", "rate_sum", "phi_vbar_sum", "t1"];

/// One trajectory: `τ`, `Σ_{n<τ} r(n)`, `Σ_{n<τ} φ∘V̄`, `T₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub tau: u64,
    pub rate_sum: f64,
    pub phi_sum: f64,
    pub t1: u64,
}

impl Outcome {
    fn as_array(&self) -> [f64; 4] {
        [self.tau as f64, self.rate_sum, self.phi_sum, self.t1 as f64]
    }
}

/// Cumulative transition tables for sampling.
#[derive(Debug, Clone, PartialEq)]
struct Tables {
    n: usize,
    p_cdf: Vec<Vec<f64>>,
    q_cdf: Vec<Vec<f64>>,
    eps_nu: Vec<f64>,
}

impl Tables {
    fn new(aug: &AugmentedSequence) -> Self {
        let n = aug.n_states();
        let mut p_cdf = Vec::new();
        let mut q_cdf = Vec::new();
        let mut eps_nu = Vec::new();
        for k in aug.kernels() {
            p_cdf.push(cumulative(k.base().rows_flat(), n));
            let q: Vec<f64> = (0..n).flat_map(|x| k.q_row(x).iter().copied()).collect();
            q_cdf.push(cumulative(&q, n));
            eps_nu.push(k.eps_nu());
        }
        Tables {
            n,
            p_cdf,
            q_cdf,
            eps_nu,
        }
    }
}

fn cumulative(rows: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows.len());
    for x in 0..n {
        let mut acc = 0.0;
        for &p in &rows[x * n..(x + 1) * n] {
            acc += p;
            out.push(acc);
        }
    }
    out
}

#[inline]
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn draw(cdf: &[f64], n: usize, x: usize, u: f64) -> usize {
    let row = &cdf[x * n..(x + 1) * n];
    row.partition_point(|&c| c <= u).min(n - 1)
}

/// Simulates replicate `index` from `(x, x', 0)` until coupling.
pub fn simulate_replicate(
    aug: &AugmentedSequence,
    start: (usize, usize),
    rate: &Rate,
    seed: u64,
    index: u64,
    max_steps: u64,
) -> Result<Outcome> {
    replicate(aug, &Tables::new(aug), start, rate, seed, index, max_steps)
}

fn replicate(
    aug: &AugmentedSequence,
    tables: &Tables,
    start: (usize, usize),
    rate: &Rate,
    seed: u64,
    index: u64,
    max_steps: u64,
) -> Result<Outcome> {
    let n = tables.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let (mut x, mut x2) = start;
    let mut step = 0u64;
    let mut t1 = None;
    let mut rate_sum = 0.0;
    let mut phi_sum = 0.0;
    loop {
        let z = x * n + x2;
        rate_sum += rate.at(step as usize);
        phi_sum += aug.phi_vbar()[z];
        let ki = aug.base().index_of(step as usize + 1);
        if aug.in_cbar()[z] {
            t1.get_or_insert(step);
            if uniform(&mut rng) < tables.eps_nu[ki] {
                return Ok(Outcome {
                    tau: step + 1,
                    rate_sum,
                    phi_sum,
                    t1: t1.unwrap_or(step),
                });
            }
            let cdf = &tables.q_cdf[ki];
            x = draw(cdf, n, x, uniform(&mut rng));
            x2 = draw(cdf, n, x2, uniform(&mut rng));
        } else {
            let cdf = &tables.p_cdf[ki];
            x = draw(cdf, n, x, uniform(&mut rng));
            x2 = draw(cdf, n, x2, uniform(&mut rng));
        }
        step += 1;
        if step >= max_steps {
            return Err(Error::NonConvergence {
                what: "simulated coupling",
                steps: step as usize,
            });
        }
    }
}

/// Count, means and centred second moments of the four outcome statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: [f64; 4],
    pub m2: [f64; 4],
}

impl Moments {
    pub const EMPTY: Moments = Moments {
        count: 0,
        mean: [0.0; 4],
        m2: [0.0; 4],
    };

    fn push(&mut self, v: [f64; 4]) {
        self.count += 1;
        let c = self.count as f64;
        for (i, &vi) in v.iter().enumerate() {
            let d = vi - self.mean[i];
            self.mean[i] += d / c;
            self.m2[i] += d * (vi - self.mean[i]);
        }
    }

    /// Chan et al. parallel combination.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let mut out = Moments {
            count: self.count + other.count,
            ..Moments::EMPTY
        };
        for i in 0..4 {
            let d = other.mean[i] - self.mean[i];
            out.mean[i] = self.mean[i] + d * nb / n;
            out.m2[i] = self.m2[i] + other.m2[i] + d * d * na * nb / n;
        }
        out
    }
}

/// Runs chunk `chunk` (replicates `chunk · CHUNK_SIZE ..`) of a
/// `replicates`-replicate experiment.
pub fn simulate_chunk(
    aug: &AugmentedSequence,
    start: (usize, usize),
    rate: &Rate,
    seed: u64,
    chunk: usize,
    replicates: usize,
    max_steps: u64,
) -> Result<Moments> {
    let tables = Tables::new(aug);
    chunk_with(
        aug, &tables, start, rate, seed, chunk, replicates, max_steps,
    )
}

#[allow(clippy::too_many_arguments)]
fn chunk_with(
    aug: &AugmentedSequence,
    tables: &Tables,
    start: (usize, usize),
    rate: &Rate,
    seed: u64,
    chunk: usize,
    replicates: usize,
    max_steps: u64,
) -> Result<Moments> {
    let lo = chunk * CHUNK_SIZE;
    let hi = (lo + CHUNK_SIZE).min(replicates);
    let mut m = Moments::EMPTY;
    for i in lo..hi {
        m.push(replicate(aug, tables, start, rate, seed, i as u64, max_steps)?.as_array());
    }
    Ok(m)
}

/// Merges chunk moments in a fixed pairwise tree over chunk order.
pub fn reduce_chunks(mut chunks: Vec<Moments>) -> Moments {
    if chunks.is_empty() {
        return Moments::EMPTY;
    }
    while chunks.len() > 1 {
        chunks = chunks
            .chunks(2)
            .map(|p| {
                if p.len() == 2 {
                    p[0].merge(&p[1])
                } else {
                    p[0]
                }
            })
            .collect();
    }
    chunks[0]
}

/// Sample statistics of the outcome, in [`OUTCOME_LABELS`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStats {
    pub replicates: u64,
    pub mean: [f64; 4],
    pub variance: [f64; 4],
    pub std_error: [f64; 4],
}

impl From<Moments> for SimStats {
    fn from(m: Moments) -> Self {
        let mut variance = [0.0; 4];
        let mut std_error = [0.0; 4];
        if m.count > 1 {
            for i in 0..4 {
                variance[i] = m.m2[i] / (m.count - 1) as f64;
                std_error[i] = sqrt(variance[i] / m.count as f64);
            }
        }
        SimStats {
            replicates: m.count,
            mean: m.mean,
            variance,
            std_error,
        }
    }
}

/// Number of chunks for `replicates`.
pub fn chunk_count(replicates: usize) -> usize {
    replicates.div_ceil(CHUNK_SIZE)
}

/// Sequential simulation; see the module docs for the reduction order.
pub fn simulate(
    aug: &AugmentedSequence,
    start: (usize, usize),
    rate: &Rate,
    replicates: usize,
    seed: u64,
    max_steps: u64,
) -> Result<SimStats> {
    if replicates == 0 {
        return Err(Error::Domain {
            what: "replicates",
            value: 0.0,
        });
    }
    let tables = Tables::new(aug);
    let chunks = (0..chunk_count(replicates))
        .map(|c| chunk_with(aug, &tables, start, rate, seed, c, replicates, max_steps))
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce_chunks(chunks).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{drift_constants, StateSet};
    use crate::chain::{FiniteKernel, KernelSequence};
    use crate::ratefn::PhiSpec;
    use crate::Tolerances;
    use alloc::vec;

    fn aug(rows: Vec<Vec<f64>>) -> AugmentedSequence {
        let p = FiniteKernel::new(rows, 0, &Tolerances::DEFAULT).unwrap();
        let c = drift_constants(
            &KernelSequence::homogeneous(p),
            &[1.0, 2.0],
            PhiSpec::polynomial(0.5, 1.0).unwrap(),
            &StateSet::all(2),
            None,
            &Tolerances::DEFAULT,
        )
        .unwrap();
        AugmentedSequence::new(&c).unwrap()
    }

    #[test]
    fn certain_coupling() {
        let a = aug(vec![vec![0.2, 0.8], vec![0.2, 0.8]]);
        let s = simulate(&a, (0, 1), &Rate::Unit, 3000, 7, 1000).unwrap();
        assert_eq!(s.mean[0], 1.0);
        assert_eq!(s.variance[0], 0.0);
        assert_eq!(s.mean[3], 0.0);
    }

    #[test]
    fn deterministic_and_chunk_order_free() {
        let a = aug(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        let s1 = simulate(&a, (0, 1), &Rate::Unit, 5000, 42, 1_000_000).unwrap();
        let s2 = simulate(&a, (0, 1), &Rate::Unit, 5000, 42, 1_000_000).unwrap();
        assert_eq!(s1, s2);
        let mut chunks: Vec<Moments> = (0..chunk_count(5000))
            .rev()
            .map(|c| simulate_chunk(&a, (0, 1), &Rate::Unit, 42, c, 5000, 1_000_000).unwrap())
            .collect();
        chunks.reverse();
        assert_eq!(SimStats::from(reduce_chunks(chunks)), s1);
        // E[τ] = 1/ε_ν with C̄ = X².
        assert!((s1.mean[0] - 1.0 / 0.7).abs() < 4.0 * s1.std_error[0]);
    }

    #[test]
    fn merge_matches_sequential() {
        let mut a = Moments::EMPTY;
        let mut b = Moments::EMPTY;
        let mut all = Moments::EMPTY;
        for i in 0..100 {
            let v = [i as f64, (i * i) as f64, 1.0, -(i as f64)];
            if i < 37 {
                a.push(v);
            } else {
                b.push(v);
            }
            all.push(v);
        }
        let m = a.merge(&b);
        for i in 0..4 {
            assert!((m.mean[i] - all.mean[i]).abs() <= 1e-12 * all.mean[i].abs().max(1.0));
            assert!((m.m2[i] - all.m2[i]).abs() <= 1e-10 * all.m2[i].abs().max(1.0));
        }
    }
}
