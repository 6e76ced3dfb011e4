use alloc::vec;
use alloc::vec::Vec;

use crate::certify::DriftCertificate;
use crate::chain::{evolve_measure, FiniteKernel, KernelSequence, StateMeasure};
use crate::{Error, Result, Tolerances};

/// One step `P̄_k` of the coupled chain.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedKernel {
    n: usize,
    p: FiniteKernel,
    /// Residual rows `Q_k(x, ·)` for `x ∈ C`; zero rows elsewhere or when
    /// `ε_ν = 1`.
    q: Vec<f64>,
    nu: Vec<f64>,
    eps_nu: f64,
    in_c: Vec<bool>,
}

/// Transition out of `(x, x', 0)`: mass on `(y, y', 0)` and on `(y, y, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedRow {
    pub uncoupled: Vec<f64>,
    pub coupled: Vec<f64>,
}

impl AugmentedRow {
    pub fn total(&self) -> f64 {
        self.uncoupled.iter().sum::<f64>() + self.coupled.iter().sum::<f64>()
    }
}

/// Builds `P̄_k` for step `k ≥ 1` of the certified sequence.
pub fn build_augmented(cert: &DriftCertificate, k: usize) -> Result<AugmentedKernel> {
    let ki = cert.seq.index_of(k.max(1));
    build_for_index(cert, ki)
}

fn build_for_index(cert: &DriftCertificate, ki: usize) -> Result<AugmentedKernel> {
    let n = cert.n_states();
    let p = cert.seq.kernels()[ki].clone();
    let nu = cert.nus[ki].clone();
    let eps = cert.constants.eps_nu;
    let in_c = cert.small_set.mask().to_vec();
    let mut q = vec![0.0; n * n];
    if eps < 1.0 {
        for x in (0..n).filter(|&x| in_c[x]) {
            for y in 0..n {
                let r = p.get(x, y) - eps * nu[y];
                if r < -Tolerances::DEFAULT.row_sum {
                    return Err(Error::NegativeResidual {
                        kernel: ki,
                        row: x,
                        col: y,
                        value: r,
                    });
                }
                q[x * n + y] = r.max(0.0) / (1.0 - eps);
            }
        }
    }
    Ok(AugmentedKernel {
        n,
        p,
        q,
        nu,
        eps_nu: eps,
        in_c,
    })
}

impl AugmentedKernel {
    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &FiniteKernel {
        &self.p
    }

    pub fn eps_nu(&self) -> f64 {
        self.eps_nu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    #[inline]
    pub fn in_cbar(&self, x: usize, x2: usize) -> bool {
        self.in_c[x] && self.in_c[x2]
    }

    pub fn in_c(&self) -> &[bool] {
        &self.in_c
    }

    /// `Q_k(x, ·)`; only meaningful for `x ∈ C` and `ε_ν < 1`.
    #[inline]
    pub fn q_row(&self, x: usize) -> &[f64] {
        &self.q[x * self.n..(x + 1) * self.n]
    }

    /// The explicit transition out of `(x, x', 0)`.
    pub fn row(&self, x: usize, x2: usize) -> AugmentedRow {
        let n = self.n;
        let mut uncoupled = vec![0.0; n * n];
        let mut coupled = vec![0.0; n];
        if self.in_cbar(x, x2) {
            let keep = 1.0 - self.eps_nu;
            if keep > 0.0 {
                for y in 0..n {
                    for y2 in 0..n {
                        uncoupled[y * n + y2] = keep * self.q_row(x)[y] * self.q_row(x2)[y2];
                    }
                }
            }
            for (c, m) in coupled.iter_mut().zip(&self.nu) {
                *c = self.eps_nu * m;
            }
        } else {
            for y in 0..n {
                for y2 in 0..n {
                    uncoupled[y * n + y2] = self.p.get(x, y) * self.p.get(x2, y2);
                }
            }
        }
        AugmentedRow { uncoupled, coupled }
    }

    /// `(K H)(x, x') = Σ P̄_k(x, x', 0; y, y', 0) H(y, y')`.
    pub fn apply_uncoupled(&self, h: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = sandwich(self.p_rows(), h, n);
        if self.in_c.iter().any(|&b| b) {
            let keep = 1.0 - self.eps_nu;
            let b = if keep > 0.0 {
                sandwich(&self.q, h, n)
            } else {
                vec![0.0; n * n]
            };
            for x in 0..n {
                for x2 in 0..n {
                    if self.in_cbar(x, x2) {
                        out[x * n + x2] = keep * b[x * n + x2];
                    }
                }
            }
        }
        out
    }

    /// Pushes `d = 0` mass one step; returns the new `d = 0` mass and the mass
    /// that coupled, as a measure on the diagonal.
    pub fn push_uncoupled(&self, mu: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut off = mu.to_vec();
        let mut on = vec![0.0; n * n];
        let mut on_mass = 0.0;
        for x in 0..n {
            for x2 in 0..n {
                if self.in_cbar(x, x2) {
                    let z = x * n + x2;
                    on[z] = mu[z];
                    on_mass += mu[z];
                    off[z] = 0.0;
                }
            }
        }
        let mut out = push_sandwich(self.p_rows(), &off, n);
        let keep = 1.0 - self.eps_nu;
        if on_mass > 0.0 && keep > 0.0 {
            let b = push_sandwich(&self.q, &on, n);
            for (o, v) in out.iter_mut().zip(&b) {
                *o += keep * v;
            }
        }
        let coupled = self.nu.iter().map(|m| self.eps_nu * on_mass * m).collect();
        (out, coupled)
    }

    fn p_rows(&self) -> &[f64] {
        self.p.rows_flat()
    }
}

/// `A H Aᵀ` for `n × n` row-major `A`, `H`.
fn sandwich(a: &[f64], h: &[f64], n: usize) -> Vec<f64> {
    // t(y, x') = Σ_{y'} h(y, y') a(x', y')
    let mut t = vec![0.0; n * n];
    for y in 0..n {
        let hr = &h[y * n..(y + 1) * n];
        for x2 in 0..n {
            let ar = &a[x2 * n..(x2 + 1) * n];
            t[y * n + x2] = hr.iter().zip(ar).map(|(p, q)| p * q).sum();
        }
    }
    // out(x, x') = Σ_y a(x, y) t(y, x')
    let mut out = vec![0.0; n * n];
    for x in 0..n {
        let row = &mut out[x * n..(x + 1) * n];
        for y in 0..n {
            let w = a[x * n + y];
            if w != 0.0 {
                let tr = &t[y * n..(y + 1) * n];
                for (o, v) in row.iter_mut().zip(tr) {
                    *o += w * v;
                }
            }
        }
    }
    out
}

/// `Aᵀ M A` for `n × n` row-major `A`, `M`.
fn push_sandwich(a: &[f64], m: &[f64], n: usize) -> Vec<f64> {
    // t(y, x') = Σ_x a(x, y) m(x, x')
    let mut t = vec![0.0; n * n];
    for x in 0..n {
        let mr = &m[x * n..(x + 1) * n];
        if mr.iter().all(|&v| v == 0.0) {
            continue;
        }
        for y in 0..n {
            let w = a[x * n + y];
            if w != 0.0 {
                let tr = &mut t[y * n..(y + 1) * n];
                for (o, v) in tr.iter_mut().zip(mr) {
                    *o += w * v;
                }
            }
        }
    }
    // out(y, y') = Σ_{x'} t(y, x') a(x', y')
    let mut out = vec![0.0; n * n];
    for y in 0..n {
        let row = &mut out[y * n..(y + 1) * n];
        for x2 in 0..n {
            let w = t[y * n + x2];
            if w != 0.0 {
                let ar = &a[x2 * n..(x2 + 1) * n];
                for (o, v) in row.iter_mut().zip(ar) {
                    *o += w * v;
                }
            }
        }
    }
    out
}

/// `P̄₁, P̄₂, …` for a certified sequence, with pair-level helpers.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSequence {
    seq: KernelSequence,
    kernels: Vec<AugmentedKernel>,
    vbar: Vec<f64>,
    phi_vbar: Vec<f64>,
    in_cbar: Vec<bool>,
}

impl AugmentedSequence {
    pub fn new(cert: &DriftCertificate) -> Result<Self> {
        let n = cert.n_states();
        let kernels = (0..cert.seq.kernels().len())
            .map(|ki| build_for_index(cert, ki))
            .collect::<Result<Vec<_>>>()?;
        let mut vbar = vec![0.0; n * n];
        let mut phi_vbar = vec![0.0; n * n];
        let mut in_cbar = vec![false; n * n];
        for x in 0..n {
            for x2 in 0..n {
                let z = x * n + x2;
                vbar[z] = cert.v[x] + cert.v[x2] - 1.0;
                phi_vbar[z] = cert.constants.phi.value(vbar[z]);
                in_cbar[z] = cert.small_set.contains(x) && cert.small_set.contains(x2);
            }
        }
        Ok(AugmentedSequence {
            seq: cert.seq.clone(),
            kernels,
            vbar,
            phi_vbar,
            in_cbar,
        })
    }

    pub fn n_states(&self) -> usize {
        self.seq.n_states()
    }

    /// `P̄_k`, `k ≥ 1`.
    #[inline]
    pub fn kernel(&self, k: usize) -> &AugmentedKernel {
        &self.kernels[self.seq.index_of(k)]
    }

    pub fn kernels(&self) -> &[AugmentedKernel] {
        &self.kernels
    }

    pub fn base(&self) -> &KernelSequence {
        &self.seq
    }

    /// `V̄(x, x') = V(x) + V(x') - 1` per pair.
    pub fn vbar(&self) -> &[f64] {
        &self.vbar
    }

    /// `φ(V̄)` per pair.
    pub fn phi_vbar(&self) -> &[f64] {
        &self.phi_vbar
    }

    pub fn in_cbar(&self) -> &[bool] {
        &self.in_cbar
    }
}

/// Law of the coupled chain at time `n`: `d = 0` mass per pair and `d = 1`
/// mass per diagonal state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledDistribution {
    pub time: usize,
    pub uncoupled: Vec<f64>,
    pub coupled: Vec<f64>,
}

impl CoupledDistribution {
    pub fn start(n: usize, x: usize, x2: usize) -> Self {
        let mut uncoupled = vec![0.0; n * n];
        uncoupled[x * n + x2] = 1.0;
        CoupledDistribution {
            time: 0,
            uncoupled,
            coupled: vec![0.0; n],
        }
    }

    /// `P(τ > time)`.
    pub fn uncoupled_mass(&self) -> f64 {
        self.uncoupled.iter().sum()
    }

    pub fn step(&mut self, aug: &AugmentedSequence) {
        let k = self.time + 1;
        let kernel = aug.kernel(k);
        let (next, entered) = kernel.push_uncoupled(&self.uncoupled);
        let mut coupled = kernel.base().push(&self.coupled);
        for (c, e) in coupled.iter_mut().zip(&entered) {
            *c += e;
        }
        self.uncoupled = next;
        self.coupled = coupled;
        self.time = k;
    }

    /// Laws of `X_n` and `X'_n`.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.coupled.len();
        let mut a = self.coupled.clone();
        let mut b = self.coupled.clone();
        for (x, row) in self.uncoupled.chunks(n).enumerate() {
            for (x2, &m) in row.iter().enumerate() {
                a[x] += m;
                b[x2] += m;
            }
        }
        (a, b)
    }
}

/// Largest absolute difference between the coupled chain's marginals and
/// `δ_x P⁽ᵐ⁾`, `δ_x' P⁽ᵐ⁾` over `m ≤ n`.
pub fn marginal_check(aug: &AugmentedSequence, x: usize, x2: usize, n: usize) -> Result<f64> {
    let ns = aug.n_states();
    if x >= ns || x2 >= ns {
        return Err(Error::DimensionMismatch {
            expected: ns,
            found: x.max(x2) + 1,
        });
    }
    let mut dist = CoupledDistribution::start(ns, x, x2);
    let mut mu = StateMeasure::point(ns, x);
    let mut mu2 = StateMeasure::point(ns, x2);
    let seq = aug.base();
    let mut worst = 0.0_f64;
    for m in 0..=n {
        if m > 0 {
            dist.step(aug);
            mu = evolve_step(seq, &mu, m)?;
            mu2 = evolve_step(seq, &mu2, m)?;
        }
        let (a, b) = dist.marginals();
        for (p, q) in a.iter().zip(mu.values()) {
            worst = worst.max((p - q).abs());
        }
        for (p, q) in b.iter().zip(mu2.values()) {
            worst = worst.max((p - q).abs());
        }
    }
    Ok(worst)
}

/// `μ ↦ μ P_m`.
fn evolve_step(seq: &KernelSequence, mu: &StateMeasure, m: usize) -> Result<StateMeasure> {
    let one = KernelSequence::homogeneous(seq.kernel(m).clone());
    evolve_measure(&one, mu, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{drift_constants, StateSet};
    use crate::ratefn::PhiSpec;

    fn worked(eps_b: Option<f64>) -> DriftCertificate {
        let p = FiniteKernel::new(
            vec![vec![0.7, 0.3], vec![0.4, 0.6]],
            0,
            &Tolerances::DEFAULT,
        )
        .unwrap();
        drift_constants(
            &KernelSequence::homogeneous(p),
            &[1.0, 2.0],
            PhiSpec::polynomial(0.5, 1.0).unwrap(),
            &StateSet::all(2),
            eps_b,
            &Tolerances::DEFAULT,
        )
        .unwrap()
    }

    #[test]
    fn rows_sum_to_one_and_couple_eps_nu() {
        let cert = worked(None);
        let k = build_augmented(&cert, 1).unwrap();
        for x in 0..2 {
            for x2 in 0..2 {
                let r = k.row(x, x2);
                assert!((r.total() - 1.0).abs() < 1e-15);
                assert!((r.coupled.iter().sum::<f64>() - 0.7).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn full_coupling_when_rows_agree() {
        let p = FiniteKernel::new(
            vec![vec![0.2, 0.8], vec![0.2, 0.8]],
            0,
            &Tolerances::DEFAULT,
        )
        .unwrap();
        let cert = drift_constants(
            &KernelSequence::homogeneous(p),
            &[1.0, 2.0],
            PhiSpec::constant(0.5).unwrap(),
            &StateSet::all(2),
            None,
            &Tolerances::DEFAULT,
        )
        .unwrap();
        let k = build_augmented(&cert, 3).unwrap();
        let r = k.row(0, 1);
        assert_eq!(r.uncoupled.iter().sum::<f64>(), 0.0);
        assert!((r.coupled.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_matches_explicit_rows() {
        let cert = worked(None);
        let aug = AugmentedSequence::new(&cert).unwrap();
        let k = aug.kernel(1);
        let h = [1.0, 2.5, -3.0, 0.25];
        let kh = k.apply_uncoupled(&h);
        for x in 0..2 {
            for x2 in 0..2 {
                let r = k.row(x, x2);
                let want: f64 = r.uncoupled.iter().zip(&h).map(|(a, b)| a * b).sum();
                assert!((kh[x * 2 + x2] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn marginals_match_base_chain() {
        let aug = AugmentedSequence::new(&worked(None)).unwrap();
        for x in 0..2 {
            for x2 in 0..2 {
                assert_eq!(marginal_check(&aug, x, x2, 0).unwrap(), 0.0);
                assert!(marginal_check(&aug, x, x2, 50).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn uncoupled_mass_is_non_increasing() {
        let aug = AugmentedSequence::new(&worked(None)).unwrap();
        let mut d = CoupledDistribution::start(2, 0, 1);
        let mut prev = d.uncoupled_mass();
        for _ in 0..40 {
            d.step(&aug);
            let m = d.uncoupled_mass();
            assert!(m <= prev);
            prev = m;
        }
        assert!((prev - 0.3f64.powi(40)).abs() < 1e-25);
    }
}
