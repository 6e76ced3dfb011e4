//! Finite-state kernels, kernel sequences and exact evolution.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::check_domain;
use crate::{Error, Result, Tolerances};

/// A row-stochastic `n × n` matrix stored densely, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    n: usize,
    rows: Vec<f64>,
}

impl FiniteKernel {
    /// Validates and, where a row misses 1 by at most `row_sum` tolerance,
    /// renormalises. `index` only labels errors.
    pub fn new(rows: Vec<Vec<f64>>, index: usize, tol: &Tolerances) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptySet("kernel"));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &p) in row.iter().enumerate() {
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::InvalidEntry {
                        kernel: index,
                        row: i,
                        col: j,
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol.row_sum {
                return Err(Error::RowSum {
                    kernel: index,
                    row: i,
                    sum,
                });
            }
            flat.extend(row.iter().map(|p| p / sum));
        }
        Ok(FiniteKernel { n, rows: flat })
    }

    pub fn identity(n: usize) -> Self {
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        FiniteKernel { n, rows }
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x * self.n..(x + 1) * self.n]
    }

    /// All rows, row-major.
    pub fn rows_flat(&self) -> &[f64] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x * self.n + y]
    }

    /// `(Pf)(x) = Σ_y P(x, y) f(y)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n).map(|x| dot(self.row(x), f)).collect()
    }

    /// `(μP)(y) = Σ_x μ(x) P(x, y)`.
    pub fn push(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (x, &m) in mu.iter().enumerate() {
            if m != 0.0 {
                for (o, p) in out.iter_mut().zip(self.row(x)) {
                    *o += m * p;
                }
            }
        }
        out
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How a list of kernels is laid out in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceMode {
    /// `P_k = P` for all `k`.
    Homogeneous,
    /// `P_k` cycles through the list.
    Cycle,
    /// `P_k` follows the list, then repeats its last entry.
    List,
}

/// The inhomogeneous sequence `P₁, P₂, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSequence {
    mode: SequenceMode,
    kernels: Vec<FiniteKernel>,
}

impl KernelSequence {
    pub fn new(mode: SequenceMode, kernels: Vec<FiniteKernel>) -> Result<Self> {
        let first = kernels.first().ok_or(Error::EmptySet("kernel list"))?;
        let n = first.n_states();
        for k in &kernels {
            if k.n_states() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: k.n_states(),
                });
            }
        }
        if mode == SequenceMode::Homogeneous && kernels.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: kernels.len(),
            });
        }
        Ok(KernelSequence { mode, kernels })
    }

    pub fn homogeneous(kernel: FiniteKernel) -> Self {
        KernelSequence {
            mode: SequenceMode::Homogeneous,
            kernels: vec![kernel],
        }
    }

    pub fn mode(&self) -> SequenceMode {
        self.mode
    }

    pub fn n_states(&self) -> usize {
        self.kernels[0].n_states()
    }

    /// The distinct kernels in the sequence.
    pub fn kernels(&self) -> &[FiniteKernel] {
        &self.kernels
    }

    /// Index into [`Self::kernels`] of `P_k`, `k ≥ 1`.
    #[inline]
    pub fn index_of(&self, k: usize) -> usize {
        debug_assert!(k >= 1);
        let len = self.kernels.len();
        match self.mode {
            SequenceMode::Homogeneous => 0,
            SequenceMode::Cycle => (k - 1) % len,
            SequenceMode::List => (k - 1).min(len - 1),
        }
    }

    /// `P_k`, `k ≥ 1`.
    #[inline]
    pub fn kernel(&self, k: usize) -> &FiniteKernel {
        &self.kernels[self.index_of(k)]
    }

    /// The sequence `P_{m+1}, P_{m+2}, …` as a standalone sequence.
    pub fn shifted(&self, m: usize) -> KernelSequence {
        let len = self.kernels.len();
        match self.mode {
            SequenceMode::Homogeneous => self.clone(),
            SequenceMode::Cycle => {
                let s = m % len;
                let mut kernels = self.kernels[s..].to_vec();
                kernels.extend_from_slice(&self.kernels[..s]);
                KernelSequence {
                    mode: SequenceMode::Cycle,
                    kernels,
                }
            }
            SequenceMode::List => {
                let s = m.min(len - 1);
                KernelSequence {
                    mode: SequenceMode::List,
                    kernels: self.kernels[s..].to_vec(),
                }
            }
        }
    }
}

/// `P⁽ⁿ⁾f = P₁(P₂(⋯(P_n f)))`.
pub fn evolve_function(seq: &KernelSequence, f: &[f64], n: usize) -> Result<Vec<f64>> {
    check_len(seq, f.len())?;
    let mut g = f.to_vec();
    for k in (1..=n).rev() {
        g = seq.kernel(k).apply(&g);
    }
    Ok(g)
}

/// `μP⁽ⁿ⁾ = (⋯((μP₁)P₂)⋯)P_n`.
pub fn evolve_measure(seq: &KernelSequence, mu: &StateMeasure, n: usize) -> Result<StateMeasure> {
    check_len(seq, mu.len())?;
    let mut m = mu.values.clone();
    for k in 1..=n {
        m = seq.kernel(k).push(&m);
    }
    Ok(StateMeasure { values: m })
}

fn check_len(seq: &KernelSequence, len: usize) -> Result<()> {
    if len != seq.n_states() {
        return Err(Error::DimensionMismatch {
            expected: seq.n_states(),
            found: len,
        });
    }
    Ok(())
}

/// A non-negative measure on the states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMeasure {
    values: Vec<f64>,
}

impl StateMeasure {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for &m in &values {
            check_domain(m >= 0.0 && m.is_finite(), "measure entry", m)?;
        }
        Ok(StateMeasure { values })
    }

    /// A probability measure; rejects total mass off 1 by more than `1e-12`.
    pub fn probability(values: Vec<f64>) -> Result<Self> {
        let m = Self::new(values)?;
        let mass = m.mass();
        if (mass - 1.0).abs() > Tolerances::DEFAULT.row_sum {
            return Err(Error::MassMismatch {
                left: mass,
                right: 1.0,
            });
        }
        Ok(m)
    }

    pub fn point(n: usize, x: usize) -> Self {
        let mut values = vec![0.0; n];
        values[x] = 1.0;
        StateMeasure { values }
    }

    pub fn uniform(n: usize) -> Self {
        StateMeasure {
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `⟨μ, f⟩`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        dot(&self.values, f)
    }
}

/// `½ Σ |μ₁ - μ₂|`.
pub fn tv_distance(mu1: &StateMeasure, mu2: &StateMeasure) -> Result<f64> {
    if mu1.len() != mu2.len() {
        return Err(Error::DimensionMismatch {
            expected: mu1.len(),
            found: mu2.len(),
        });
    }
    let (m1, m2) = (mu1.mass(), mu2.mass());
    if (m1 - m2).abs() > Tolerances::DEFAULT.row_sum {
        return Err(Error::MassMismatch {
            left: m1,
            right: m2,
        });
    }
    let s: f64 = mu1
        .values
        .iter()
        .zip(&mu2.values)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * s)
}

/// The invariant law of an irreducible aperiodic kernel.
pub fn stationary(kernel: &FiniteKernel) -> Result<StateMeasure> {
    let n = kernel.n_states();
    if !irreducible(kernel) {
        return Err(Error::Reducible);
    }
    let period = period(kernel);
    if period != 1 {
        return Err(Error::Periodic { period });
    }
    // Solve π(P - I) = 0 with the last equation replaced by Σπ = 1.
    // Unknowns are π; row i of the system is column i of (P - I)ᵀ.
    let mut a = vec![0.0; n * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            a[i * (n + 1) + j] = kernel.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1) * (n + 1) + j] = 1.0;
    }
    a[(n - 1) * (n + 1) + n] = 1.0;
    let mut pi = solve_augmented(&mut a, n)?;
    for p in pi.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let mass: f64 = pi.iter().sum();
    for p in pi.iter_mut() {
        *p /= mass;
    }
    StateMeasure::new(pi)
}

/// Gaussian elimination with partial pivoting on an `n × (n+1)` system.
fn solve_augmented(a: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let w = n + 1;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * w + col].abs().total_cmp(&a[j * w + col].abs()))
            .unwrap_or(col);
        if a[pivot * w + col] == 0.0 {
            return Err(Error::Degenerate("singular stationary system"));
        }
        if pivot != col {
            for j in 0..w {
                a.swap(col * w + j, pivot * w + j);
            }
        }
        let d = a[col * w + col];
        for i in 0..n {
            if i != col {
                let factor = a[i * w + col] / d;
                if factor != 0.0 {
                    for j in col..w {
                        a[i * w + j] -= factor * a[col * w + j];
                    }
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i * w + n] / a[i * w + i]).collect())
}

fn reachable_from(kernel: &FiniteKernel, start: usize, reverse: bool) -> Vec<bool> {
    let n = kernel.n_states();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(x) = stack.pop() {
        for (y, s) in seen.iter_mut().enumerate() {
            let p = if reverse {
                kernel.get(y, x)
            } else {
                kernel.get(x, y)
            };
            if p > 0.0 && !*s {
                *s = true;
                stack.push(y);
            }
        }
    }
    seen
}

fn irreducible(kernel: &FiniteKernel) -> bool {
    reachable_from(kernel, 0, false).iter().all(|&b| b)
        && reachable_from(kernel, 0, true).iter().all(|&b| b)
}

/// Period of an irreducible kernel: gcd of `level(x) + 1 - level(y)` over
/// edges `x → y` of a BFS from state 0.
fn period(kernel: &FiniteKernel) -> usize {
    let n = kernel.n_states();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = alloc::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for y in 0..n {
            if kernel.get(x, y) > 0.0 && level[y] == usize::MAX {
                level[y] = level[x] + 1;
                queue.push_back(y);
            }
        }
    }
    let mut g = 0usize;
    for x in 0..n {
        for y in 0..n {
            if kernel.get(x, y) > 0.0 {
                let d = (level[x] + 1).abs_diff(level[y]);
                g = gcd(g, d);
            }
        }
    }
    g
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
