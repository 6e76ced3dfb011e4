//! The explicit constant ledger of the main bound and of its polynomial
//! corollaries.
//!
//! Everything here is a pure function of the drift/minorisation scalars
//! `(φ, b_V, c_V, ε_b, ε_ν)`; the kernels themselves are not needed.

use crate::error::check_domain;
use crate::float::{pow_zero_one, powf};
use crate::ratefn::{delta_unchecked, PhiSpec};
use crate::young::make_pair;
use crate::{Error, Result, Tolerances};

/// The scalar part of a drift/minorisation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftConstants {
    pub phi: PhiSpec,
    pub b_v: f64,
    pub c_v: f64,
    pub eps_b: f64,
    pub eps_nu: f64,
}

impl DriftConstants {
    pub fn new(phi: PhiSpec, b_v: f64, c_v: f64, eps_b: f64, eps_nu: f64) -> Result<Self> {
        check_domain(b_v >= 0.0 && b_v.is_finite(), "b_v", b_v)?;
        check_domain(c_v >= 1.0 && c_v.is_finite(), "c_v", c_v)?;
        check_domain(eps_b > 0.0 && eps_b < 1.0, "eps_b", eps_b)?;
        check_domain(eps_nu > 0.0 && eps_nu <= 1.0, "eps_nu", eps_nu)?;
        Ok(DriftConstants {
            phi,
            b_v,
            c_v,
            eps_b,
            eps_nu,
        })
    }

    /// `r(1)` for this certificate's `φ` and `ε_b`.
    pub fn r_one(&self) -> f64 {
        self.phi.rate_at(self.eps_b, 1.0)
    }
}

/// `b̄ = 2 b_V + ε_b φ(1)`.
pub fn bar_b(k: &DriftConstants) -> f64 {
    2.0 * k.b_v + k.eps_b * k.phi.at_one()
}

/// `M₁ = r(1) [1 + 2r(1)/(ε_b φ(1)) ((b_V + c_V)/(1 - ε_ν) - 1)]`.
///
/// Undefined when `ε_ν = 1`: coupling then succeeds at the first visit and
/// `M₁` never enters the constants.
pub fn m_one(k: &DriftConstants) -> Result<f64> {
    if k.eps_nu >= 1.0 {
        return Err(Error::Degenerate("M1 is unused when eps_nu = 1"));
    }
    let r1 = k.r_one();
    let scale = 2.0 * r1 / (k.eps_b * k.phi.at_one());
    Ok(r1 * (1.0 + scale * ((k.b_v + k.c_v) / (1.0 - k.eps_nu) - 1.0)))
}

/// Upper bound on a positive series: partial sum plus rigorous tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBound {
    /// Partial sum plus `tail`; never below the true sum.
    pub value: f64,
    /// Number of summed terms; 0 when the sum is available in closed form.
    pub terms: usize,
    pub tail: f64,
}

/// `c* = Σ_{j≥1} (1-ε_ν)^(j-1) Π_{k<j} (1 + δ_k M₁)`, bounded from above.
///
/// Consecutive terms have ratio `ρ_j = (1-ε_ν)(1 + δ_j M₁)`, which is
/// non-increasing in `j`. Once `ρ_J < 1` the remainder after term `J` is at
/// most `term_J ρ_J / (1 - ρ_J)`; summation stops when that bound drops below
/// `tol` times the partial sum, and the bound is added to the result.
pub fn c_star(k: &DriftConstants, tol: f64) -> Result<SeriesBound> {
    c_star_with_budget(k, tol, Tolerances::DEFAULT.series_max_terms)
}

pub fn c_star_with_budget(k: &DriftConstants, tol: f64, max_terms: usize) -> Result<SeriesBound> {
    check_domain(tol > 0.0, "tol", tol)?;
    if k.eps_nu >= 1.0 {
        return Ok(SeriesBound {
            value: 1.0,
            terms: 1,
            tail: 0.0,
        });
    }
    if k.phi.is_constant() {
        // δ_k ≡ 0: a geometric series.
        return Ok(SeriesBound {
            value: 1.0 / k.eps_nu,
            terms: 0,
            tail: 0.0,
        });
    }
    let m1 = m_one(k)?;
    let keep = 1.0 - k.eps_nu;
    let mut partial = 0.0_f64;
    let mut term = 1.0_f64;
    let mut j = 1usize;
    loop {
        partial += term;
        let rho = keep * (1.0 + delta_unchecked(&k.phi, k.eps_b, j as f64) * m1);
        if rho < 1.0 {
            let tail = term * rho / (1.0 - rho);
            if tail < tol * partial {
                return Ok(SeriesBound {
                    value: partial + tail,
                    terms: j,
                    tail,
                });
            }
        }
        if j >= max_terms {
            return Err(Error::NonConvergence {
                what: "c* series",
                steps: j,
            });
        }
        term *= rho;
        if !term.is_finite() || !partial.is_finite() {
            return Err(Error::Overflow("c* series"));
        }
        j += 1;
    }
}

/// The assembled constant ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConstants {
    pub bar_b: f64,
    /// `None` when `ε_ν = 1`.
    pub m_one: Option<f64>,
    /// Upper bound on `c*` including the series tail.
    pub c_star: f64,
    pub c: f64,
    pub r_one: f64,
    pub series_terms_used: usize,
    pub series_tail_bound: f64,
}

/// `c = 2/(ε_b φ(1)) [2 + b̄/ε_ν + c* b̄ r(1) (1 + r(1)/(ε_b φ(1)))]`, using the
/// upper bound on `c*` so the result is never too small.
pub fn theorem_c(k: &DriftConstants, tol: f64) -> Result<TheoremConstants> {
    let series = c_star(k, tol)?;
    let bb = bar_b(k);
    let r1 = k.r_one();
    let e_phi1 = k.eps_b * k.phi.at_one();
    let m1 = if k.eps_nu < 1.0 {
        Some(m_one(k)?)
    } else {
        None
    };
    let c = 2.0 / e_phi1 * (2.0 + bb / k.eps_nu + series.value * bb * r1 * (1.0 + r1 / e_phi1));
    if !c.is_finite() {
        return Err(Error::Overflow("theorem constant c"));
    }
    Ok(TheoremConstants {
        bar_b: bb,
        m_one: m1,
        c_star: series.value,
        c,
        r_one: r1,
        series_terms_used: series.terms,
        series_tail_bound: series.tail,
    })
}

/// Right-hand sides of the three coupled-chain lemmas, as functions of
/// `V̄(x, x') = V(x) + V(x') - 1`.
///
/// These are the per-state bounds on
/// `E[Σ_{n<τ} φ∘V̄]`, `E[Σ_{n≤T₁} r(n)]` and `E[Σ_{n<τ} r(n)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaBounds {
    eps_b: f64,
    eps_nu: f64,
    phi1: f64,
    bar_b: f64,
    r1: f64,
    c_star: f64,
}

/// Affine function `slope · V̄ + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl Affine {
    #[inline]
    pub fn eval(&self, vbar: f64) -> f64 {
        self.slope * vbar + self.intercept
    }
}

impl LemmaBounds {
    pub fn new(k: &DriftConstants, t: &TheoremConstants) -> Self {
        LemmaBounds {
            eps_b: k.eps_b,
            eps_nu: k.eps_nu,
            phi1: k.phi.at_one(),
            bar_b: t.bar_b,
            r1: t.r_one,
            c_star: t.c_star,
        }
    }

    /// `E[Σ_{n<τ} φ∘V̄] ≤ V̄/ε_b + b̄/(ε_b ε_ν)`.
    pub fn phi_sum(&self) -> Affine {
        Affine {
            slope: 1.0 / self.eps_b,
            intercept: self.bar_b / (self.eps_b * self.eps_nu),
        }
    }

    /// `E[Σ_{n≤T₁} r(n)] ≤ 1 + r(1)/(ε_b φ(1)) (V̄ - 1) 1{(x,x') ∉ C̄}`.
    pub fn first_hit(&self, vbar: f64, in_small: bool) -> f64 {
        if in_small {
            1.0
        } else {
            self.first_hit_affine().eval(vbar)
        }
    }

    /// The off-`C̄` branch of [`Self::first_hit`], which dominates both.
    pub fn first_hit_affine(&self) -> Affine {
        let s = self.r1 / (self.eps_b * self.phi1);
        Affine {
            slope: s,
            intercept: 1.0 - s,
        }
    }

    /// `E[Σ_{n<τ} r(n)] ≤ (1/(ε_b φ(1))) [(1 + c* b̄ r(1)²/(ε_b φ(1))) V̄
    ///  + c* b̄ r(1) - 1 - c* b̄ r(1)²/(ε_b φ(1))]`.
    pub fn rate_sum(&self) -> Affine {
        let e = self.eps_b * self.phi1;
        let a = self.c_star * self.bar_b * self.r1 * self.r1 / e;
        Affine {
            slope: (1.0 + a) / e,
            intercept: (self.c_star * self.bar_b * self.r1 - 1.0 - a) / e,
        }
    }
}

/// `c_{α,β,ε_b} = min{1, (ε_b β (1-α))^(α/(1-α))}`, so that
/// `r(n) ≥ c_{α,β,ε_b} (n+1)^(α/(1-α))`.
pub fn poly_min_const(alpha: f64, beta: f64, eps_b: f64) -> Result<f64> {
    let phi = PhiSpec::polynomial(alpha, beta)?;
    check_domain(eps_b > 0.0 && eps_b < 1.0, "eps_b", eps_b)?;
    let q = 1.0 - phi.alpha();
    Ok(f64::min(
        1.0,
        pow_zero_one(eps_b * beta * q, phi.alpha() / q),
    ))
}

/// Multiplier `K` with
/// `Σ (n+1)^(ξα/(1-α)) |P⁽ⁿ⁾f(x) - P⁽ⁿ⁾f(x')| ≤ K c ‖f‖_{V^(α(1-ξ))} V̄(x, x')`.
///
/// With the AM–GM pair, `(n+1)^(ξα/(1-α)) ≤ Ψ₁(r(n)) / (a₁ c_{α,β,ε_b}^ξ)` and
/// `W = a₂ V^(α(1-ξ))`, so `K = c_{α,β,ε_b}^(-ξ) / (a₁ a₂)`.
pub fn poly_corollary_const(alpha: f64, beta: f64, eps_b: f64, xi: f64) -> Result<f64> {
    let min_c = poly_min_const(alpha, beta, eps_b)?;
    let pair = make_pair(xi)?;
    Ok(pow_zero_one(min_c, -xi) / (pair.a1() * pair.a2()))
}

/// Output of the moment-trading rescaling `V = V̂^η`, `η = 1 - λα`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescaled {
    pub eta: f64,
    /// `φ(v) = η β v^(α_λ)` with `α_λ = α(1-λ)/(1-λα)`.
    pub phi: PhiSpec,
    /// `b_V = b̂^η + φ(ĉ)`.
    pub b_v: f64,
    /// Smallest `c_V ≥ ĉ` with `φ(c_V) ≥ b_V / (1 - ε_b)`.
    pub c_v_min: f64,
    pub eps_b: f64,
}

pub fn rescale_condition2(
    alpha: f64,
    beta: f64,
    b_hat: f64,
    c_hat: f64,
    lambda: f64,
    eps_b_target: f64,
) -> Result<Rescaled> {
    check_domain((0.0..1.0).contains(&alpha), "alpha", alpha)?;
    check_domain(beta > 0.0 && beta.is_finite(), "beta", beta)?;
    check_domain(b_hat >= 0.0 && b_hat.is_finite(), "b_hat", b_hat)?;
    check_domain(c_hat >= 1.0 && c_hat.is_finite(), "c_hat", c_hat)?;
    check_domain((0.0..1.0).contains(&lambda), "lambda", lambda)?;
    check_domain(
        eps_b_target > 0.0 && eps_b_target < 1.0,
        "eps_b",
        eps_b_target,
    )?;
    let eta = 1.0 - lambda * alpha;
    let alpha_l = rescaled_alpha(alpha, lambda);
    let phi = PhiSpec::polynomial(alpha_l, eta * beta)?;
    let b_v = pow_zero_one(b_hat, eta) + phi.value(c_hat);
    let target = b_v / (1.0 - eps_b_target);
    let c_v_min = if phi.value(c_hat) >= target {
        c_hat
    } else if alpha_l == 0.0 {
        return Err(Error::Degenerate(
            "constant rescaled drift cannot reach b_V/(1-eps_b)",
        ));
    } else {
        let mut c = powf(target / phi.beta(), 1.0 / alpha_l).max(c_hat);
        while phi.value(c) < target {
            c = next_up(c);
        }
        while c > c_hat && phi.value(next_down(c)) >= target {
            c = next_down(c);
        }
        c
    };
    if !c_v_min.is_finite() {
        return Err(Error::Overflow("rescaled c_V"));
    }
    Ok(Rescaled {
        eta,
        phi,
        b_v,
        c_v_min,
        eps_b: eps_b_target,
    })
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

/// `α_λ = α(1-λ)/(1-λα)`.
pub fn rescaled_alpha(alpha: f64, lambda: f64) -> f64 {
    alpha * (1.0 - lambda) / (1.0 - lambda * alpha)
}
