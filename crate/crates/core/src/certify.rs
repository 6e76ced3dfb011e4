//! Drift and minorisation certificates extracted from concrete kernels.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{dot, KernelSequence};
use crate::constants::{rescale_condition2, DriftConstants, Rescaled};
use crate::error::check_domain;
use crate::float::{pow_zero_one, powf};
use crate::ratefn::PhiSpec;
use crate::{Error, Result, Tolerances};

/// Membership mask of a subset of the states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSet {
    member: Vec<bool>,
}

impl StateSet {
    pub fn from_mask(member: Vec<bool>) -> Self {
        StateSet { member }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut member = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: i + 1,
                });
            }
            member[i] = true;
        }
        Ok(StateSet { member })
    }

    pub fn all(n: usize) -> Self {
        StateSet {
            member: vec![true; n],
        }
    }

    /// `{x : values(x) ≤ level}`.
    pub fn level_set(values: &[f64], level: f64) -> Self {
        StateSet {
            member: values.iter().map(|&v| v <= level).collect(),
        }
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.member[x]
    }

    pub fn len(&self) -> usize {
        self.member.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member.is_empty()
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_full(&self) -> bool {
        self.member.iter().all(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn complement_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| i)
    }

    pub fn mask(&self) -> &[bool] {
        &self.member
    }
}

/// One failed pointwise inequality. `margin < 0` is the amount of violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kernel_index: usize,
    pub state: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minorisation {
    pub eps_nu: f64,
    /// `ν_k` per distinct kernel; all zeros when that kernel has no overlap.
    pub nus: Vec<Vec<f64>>,
    /// `(x, x', k)` with the smallest overlap, reported when `ε_ν = 0`.
    pub counterexample: Option<(usize, usize, usize)>,
}

/// Componentwise-minimum minorisation on `set_c`, one `ν_k` per kernel and a
/// common `ε_ν`.
pub fn minorisation(seq: &KernelSequence, set_c: &StateSet) -> Result<Minorisation> {
    let n = seq.n_states();
    check_set(set_c, n)?;
    if set_c.count() == 0 {
        return Err(Error::EmptySet("small set"));
    }
    let mut eps_nu = f64::INFINITY;
    let mut worst_kernel = 0;
    let mut nus = Vec::with_capacity(seq.kernels().len());
    for (k, kernel) in seq.kernels().iter().enumerate() {
        let mut m = vec![f64::INFINITY; n];
        for x in set_c.indices() {
            for (my, &p) in m.iter_mut().zip(kernel.row(x)) {
                *my = my.min(p);
            }
        }
        let mass: f64 = m.iter().sum();
        if mass < eps_nu {
            eps_nu = mass;
            worst_kernel = k;
        }
        if mass > 0.0 {
            m.iter_mut().for_each(|v| *v /= mass);
        }
        nus.push(m);
    }
    let eps_nu = eps_nu.min(1.0);
    let counterexample = if eps_nu == 0.0 {
        let kernel = &seq.kernels()[worst_kernel];
        let mut best = (f64::INFINITY, 0, 0);
        let members: Vec<usize> = set_c.indices().collect();
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i..] {
                let overlap: f64 = kernel
                    .row(x)
                    .iter()
                    .zip(kernel.row(y))
                    .map(|(a, b)| a.min(*b))
                    .sum();
                if overlap < best.0 {
                    best = (overlap, x, y);
                }
            }
        }
        Some((best.1, best.2, worst_kernel))
    } else {
        None
    };
    Ok(Minorisation {
        eps_nu,
        nus,
        counterexample,
    })
}

fn check_set(set: &StateSet, n: usize) -> Result<()> {
    if set.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: set.len(),
        });
    }
    Ok(())
}

fn check_v(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    for &x in v {
        check_domain(x >= 1.0 && x.is_finite(), "V", x)?;
    }
    Ok(())
}

/// Condition-1 constants bound to the kernels, `V`, `C` and `ν_k` they were
/// certified for.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCertificate {
    pub constants: DriftConstants,
    pub seq: KernelSequence,
    pub v: Vec<f64>,
    pub small_set: StateSet,
    /// `ν_k` per distinct kernel of `seq`.
    pub nus: Vec<Vec<f64>>,
}

impl DriftCertificate {
    pub fn n_states(&self) -> usize {
        self.v.len()
    }

    /// `ν_k` for step `k ≥ 1`.
    pub fn nu(&self, k: usize) -> &[f64] {
        &self.nus[self.seq.index_of(k)]
    }

    /// `φ(V(x))` per state.
    pub fn phi_v(&self) -> Vec<f64> {
        self.v
            .iter()
            .map(|&x| self.constants.phi.value(x))
            .collect()
    }
}

/// Largest-margin certificate for the given `V`, `φ` and `C`.
///
/// `eps_b` overrides the extracted value; it must not exceed the largest
/// admissible one.
pub fn drift_constants(
    seq: &KernelSequence,
    v: &[f64],
    phi: PhiSpec,
    set_c: &StateSet,
    eps_b: Option<f64>,
    tol: &Tolerances,
) -> Result<DriftCertificate> {
    let n = seq.n_states();
    check_v(v, n)?;
    check_set(set_c, n)?;
    if set_c.count() == 0 {
        return Err(Error::EmptySet("small set"));
    }
    let mut off = Vec::new();
    let mut b_v = 0.0_f64;
    for (k, kernel) in seq.kernels().iter().enumerate() {
        for x in 0..n {
            let g = dot(kernel.row(x), v) - v[x] + phi.value(v[x]);
            if set_c.contains(x) {
                b_v = b_v.max(g);
            } else if g > tol.drift_slack {
                off.push(Violation {
                    kernel_index: k,
                    state: x,
                    margin: -g,
                });
            }
        }
    }
    if !off.is_empty() {
        return Err(Error::Certification {
            reason: "drift fails off C".into(),
            violations: off,
        });
    }
    let c_v = set_c.indices().map(|x| v[x]).fold(1.0, f64::max);
    let eps_b = if set_c.is_full() {
        eps_b.unwrap_or(tol.eps_b_default)
    } else {
        let (arg, inf_phi) = set_c
            .complement_indices()
            .map(|x| (x, phi.value(v[x])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY));
        let largest = 1.0 - b_v / inf_phi;
        if largest <= 0.0 {
            return Err(Error::Certification {
                reason: format!(
                    "no admissible eps_b: b_V = {b_v} exceeds inf phi(V) = {inf_phi} off C"
                ),
                violations: vec![Violation {
                    kernel_index: 0,
                    state: arg,
                    margin: largest,
                }],
            });
        }
        match eps_b {
            Some(e) if e > largest => {
                return Err(Error::Certification {
                    reason: format!("eps_b = {e} exceeds the admissible {largest}"),
                    violations: vec![Violation {
                        kernel_index: 0,
                        state: arg,
                        margin: largest - e,
                    }],
                })
            }
            Some(e) => e,
            None => largest * (1.0 - tol.eps_b_margin),
        }
    };
    let minor = minorisation(seq, set_c)?;
    if minor.eps_nu <= 0.0 {
        let (x, y, k) = minor.counterexample.unwrap_or((0, 0, 0));
        return Err(Error::Certification {
            reason: format!(
                "no one-step minorisation on C: rows {x} and {y} of kernel {k} do not overlap"
            ),
            violations: vec![Violation {
                kernel_index: k,
                state: x,
                margin: 0.0,
            }],
        });
    }
    let constants = DriftConstants::new(phi, b_v, c_v, eps_b, minor.eps_nu)?;
    Ok(DriftCertificate {
        constants,
        seq: seq.clone(),
        v: v.to_vec(),
        small_set: set_c.clone(),
        nus: minor.nus,
    })
}

/// `min_{k, x∉C} (V - P_k V)/V^α`, shrunk by `1e-12`: the largest `β` for
/// which the drift holds off `C`.
pub fn fit_beta(seq: &KernelSequence, v: &[f64], alpha: f64, set_c: &StateSet) -> Result<f64> {
    let n = seq.n_states();
    check_v(v, n)?;
    check_set(set_c, n)?;
    check_domain((0.0..1.0).contains(&alpha), "alpha", alpha)?;
    let mut beta = f64::INFINITY;
    let mut worst = None;
    for (k, kernel) in seq.kernels().iter().enumerate() {
        for x in set_c.complement_indices() {
            let b = (v[x] - dot(kernel.row(x), v)) / pow_zero_one(v[x], alpha);
            if b < beta {
                beta = b;
                worst = Some((k, x));
            }
        }
    }
    match worst {
        None => Err(Error::Degenerate(
            "C covers every state; beta cannot be fitted",
        )),
        Some((k, x)) if beta <= 0.0 => Err(Error::Certification {
            reason: "V does not decrease off C".into(),
            violations: vec![Violation {
                kernel_index: k,
                state: x,
                margin: beta,
            }],
        }),
        Some(_) => Ok(beta * (1.0 - 1e-12)),
    }
}

/// Independent pointwise re-check of every Condition-1 inequality. Returns
/// the violated ones; empty means the certificate holds.
pub fn recheck(cert: &DriftCertificate, tol: &Tolerances) -> Vec<Violation> {
    let k = &cert.constants;
    let n = cert.n_states();
    let mut out = Vec::new();
    for (ki, kernel) in cert.seq.kernels().iter().enumerate() {
        let nu = &cert.nus[ki];
        for x in 0..n {
            let inside = cert.small_set.contains(x);
            let rhs = cert.v[x] - k.phi.value(cert.v[x]) + if inside { k.b_v } else { 0.0 };
            let margin = rhs - dot(kernel.row(x), &cert.v);
            if margin < -tol.drift_slack {
                out.push(Violation {
                    kernel_index: ki,
                    state: x,
                    margin,
                });
            }
            if inside {
                for (p, m) in kernel.row(x).iter().zip(nu) {
                    let d = p - k.eps_nu * m;
                    if d < -tol.row_sum {
                        out.push(Violation {
                            kernel_index: ki,
                            state: x,
                            margin: d,
                        });
                    }
                }
            }
        }
    }
    for x in 0..n {
        if cert.small_set.contains(x) {
            if cert.v[x] > k.c_v {
                out.push(Violation {
                    kernel_index: 0,
                    state: x,
                    margin: k.c_v - cert.v[x],
                });
            }
        } else {
            let d = k.phi.value(cert.v[x]) - k.b_v / (1.0 - k.eps_b);
            if d < -tol.drift_slack {
                out.push(Violation {
                    kernel_index: 0,
                    state: x,
                    margin: d,
                });
            }
        }
    }
    out
}

/// Outcome of checking the uniform polynomial drift with level-set
/// minorisation over a kernel family.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition2Report {
    /// `max_{P, x∈C} P V̂(x)`.
    pub b_hat: f64,
    /// `sup_C V̂`.
    pub c_hat: f64,
    /// Largest common `ε_v` for `A_V̂(level)`; 0 if the level set does not minorise.
    pub eps_v: f64,
    pub violations: Vec<Violation>,
}

impl Condition2Report {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.eps_v > 0.0
    }
}

/// Checks `P V̂ ≤ V̂ - β V̂^α` off `C` for every kernel of the family, reports
/// the ceiling `b̂` on `C`, and the minorisation constant of `A_V̂(level)`.
pub fn certify_condition2(
    family: &KernelSequence,
    v_hat: &[f64],
    alpha: f64,
    beta: f64,
    set_c: &StateSet,
    level: f64,
    tol: &Tolerances,
) -> Result<Condition2Report> {
    let n = family.n_states();
    check_v(v_hat, n)?;
    check_set(set_c, n)?;
    check_domain(alpha > 0.0 && alpha < 1.0, "alpha", alpha)?;
    check_domain(beta > 0.0 && beta.is_finite(), "beta", beta)?;
    if set_c.count() == 0 {
        return Err(Error::EmptySet("small set"));
    }
    let mut violations = Vec::new();
    let mut b_hat = 0.0_f64;
    for (k, kernel) in family.kernels().iter().enumerate() {
        for x in 0..n {
            let pv = dot(kernel.row(x), v_hat);
            if set_c.contains(x) {
                b_hat = b_hat.max(pv);
            } else {
                let margin = v_hat[x] - beta * powf(v_hat[x], alpha) - pv;
                if margin < -tol.drift_slack {
                    violations.push(Violation {
                        kernel_index: k,
                        state: x,
                        margin,
                    });
                }
            }
        }
    }
    let c_hat = set_c.indices().map(|x| v_hat[x]).fold(1.0, f64::max);
    let level_set = StateSet::level_set(v_hat, level);
    let eps_v = if level_set.count() == 0 {
        return Err(Error::EmptySet("level set"));
    } else {
        minorisation(family, &level_set)?.eps_nu
    };
    Ok(Condition2Report {
        b_hat,
        c_hat,
        eps_v,
        violations,
    })
}

/// A Condition-1 certificate for `V = V̂^η` obtained through the rescaling,
/// re-derived from the kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledCertificate {
    pub rescaled: Rescaled,
    pub condition2: Condition2Report,
    pub cert: DriftCertificate,
}

/// Rescales a Condition-2 family by `λ` and re-certifies on `{V ≤ c_V}`.
///
/// The returned certificate uses the kernels' own `b_V` and `c_V = sup_C V`,
/// both checked against the rescaling formulas, and `ε_b = eps_b_target`.
#[allow(clippy::too_many_arguments)]
pub fn certify_rescaled(
    seq: &KernelSequence,
    v_hat: &[f64],
    alpha: f64,
    beta: f64,
    set_c: &StateSet,
    lambda: f64,
    eps_b_target: f64,
    tol: &Tolerances,
) -> Result<RescaledCertificate> {
    let c_hat = set_c
        .indices()
        .map(|x| v_hat.get(x).copied().unwrap_or(1.0))
        .fold(1.0, f64::max);
    let condition2 = certify_condition2(seq, v_hat, alpha, beta, set_c, c_hat, tol)?;
    if !condition2.violations.is_empty() {
        return Err(Error::Certification {
            reason: "uniform polynomial drift fails off C".into(),
            violations: condition2.violations,
        });
    }
    let rescaled = rescale_condition2(
        alpha,
        beta,
        condition2.b_hat,
        condition2.c_hat,
        lambda,
        eps_b_target,
    )?;
    let v: Vec<f64> = v_hat.iter().map(|&x| powf(x, rescaled.eta)).collect();
    let set = StateSet::level_set(&v, rescaled.c_v_min);
    let cert = drift_constants(seq, &v, rescaled.phi, &set, Some(eps_b_target), tol)?;
    if cert.constants.b_v > rescaled.b_v * (1.0 + tol.drift_slack) + tol.drift_slack {
        return Err(Error::Certification {
            reason: format!(
                "extracted b_V = {} exceeds the rescaled bound {}",
                cert.constants.b_v, rescaled.b_v
            ),
            violations: Vec::new(),
        });
    }
    Ok(RescaledCertificate {
        rescaled,
        condition2,
        cert,
    })
}
