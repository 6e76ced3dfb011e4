//! The drift shape `φ`, its antiderivative `H_φ`, and the rate sequence.
//!
//! Only the polynomial family `φ(v) = β v^α` with `α ∈ [0, 1)` is built in;
//! `α = 0` is the constant drift `φ ≡ β`. Every quantity has a closed form,
//! and `H_φ` / `H_φ⁻¹` additionally have independent numerical routes
//! (adaptive Simpson quadrature, monotone bisection) used as self-checks.

use alloc::vec::Vec;

use crate::error::check_domain;
use crate::float::{exp, exp_m1, ln, ln_1p, powf};
use crate::{Result, Tolerances};

/// Polynomial drift shape `φ(v) = β v^α` on `[1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiSpec {
    alpha: f64,
    beta: f64,
}

impl PhiSpec {
    pub fn polynomial(alpha: f64, beta: f64) -> Result<Self> {
        check_domain((0.0..1.0).contains(&alpha), "alpha", alpha)?;
        check_domain(beta > 0.0 && beta.is_finite(), "beta", beta)?;
        Ok(PhiSpec { alpha, beta })
    }

    /// The constant drift `φ ≡ β`.
    pub fn constant(beta: f64) -> Result<Self> {
        Self::polynomial(0.0, beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_constant(&self) -> bool {
        self.alpha == 0.0
    }

    /// `factor · φ`, again a member of the family.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::polynomial(self.alpha, self.beta * factor)
    }

    /// `φ(v)`. Callers guarantee `v ≥ 1`.
    #[inline]
    pub fn value(&self, v: f64) -> f64 {
        if self.alpha == 0.0 {
            self.beta
        } else {
            self.beta * powf(v, self.alpha)
        }
    }

    /// `φ(1) = β`.
    #[inline]
    pub fn at_one(&self) -> f64 {
        self.beta
    }

    /// `φ′(v) = αβ v^(α-1)`.
    #[inline]
    pub fn derivative(&self, v: f64) -> f64 {
        if self.alpha == 0.0 {
            0.0
        } else {
            self.alpha * self.beta * powf(v, self.alpha - 1.0)
        }
    }

    /// Closed-form `H_φ(t) = (t^(1-α) - 1) / (β(1-α))`.
    #[inline]
    pub fn h(&self, t: f64) -> f64 {
        let q = 1.0 - self.alpha;
        exp_m1(q * ln(t)) / (self.beta * q)
    }

    /// Closed-form `H_φ⁻¹(u) = (uβ(1-α) + 1)^(1/(1-α))`.
    #[inline]
    pub fn h_inv(&self, u: f64) -> f64 {
        let q = 1.0 - self.alpha;
        exp(ln_1p(u * self.beta * q) / q)
    }

    /// `φ(H_φ⁻¹(s·n)) / φ(1)`, i.e. the rate sequence for drift scale `s`.
    #[inline]
    pub fn rate_at(&self, scale: f64, n: f64) -> f64 {
        if self.alpha == 0.0 {
            return 1.0;
        }
        let q = 1.0 - self.alpha;
        exp(self.alpha / q * ln_1p(scale * n * self.beta * q))
    }
}

/// `φ(v)` for `v ≥ 1`.
pub fn eval_phi(spec: &PhiSpec, v: f64) -> Result<f64> {
    check_domain(v >= 1.0, "v", v)?;
    Ok(spec.value(v))
}

/// `H_φ(t) = ∫₁ᵗ ds/φ(s)`, closed form.
pub fn big_h(spec: &PhiSpec, t: f64) -> Result<f64> {
    check_domain(t >= 1.0, "t", t)?;
    Ok(spec.h(t))
}

/// `H_φ(t)` by adaptive Simpson quadrature of `1/φ` on `[1, t]`.
pub fn big_h_quadrature(spec: &PhiSpec, t: f64, abs_tol: f64) -> Result<f64> {
    check_domain(t >= 1.0, "t", t)?;
    check_domain(abs_tol > 0.0, "abs_tol", abs_tol)?;
    if t == 1.0 {
        return Ok(0.0);
    }
    let f = |s: f64| 1.0 / spec.value(s);
    Ok(adaptive_simpson(&f, 1.0, t, abs_tol))
}

/// `H_φ⁻¹(u)`, closed form.
pub fn big_h_inv(spec: &PhiSpec, u: f64) -> Result<f64> {
    check_domain(u >= 0.0, "u", u)?;
    Ok(spec.h_inv(u))
}

/// `H_φ⁻¹(u)` by bisection on the monotone map `H_φ`.
///
/// The bracket is seeded from the closed form; iteration stops once
/// `|H_φ(t) - u| ≤ abs_tol` or the bracket has collapsed to adjacent floats.
pub fn big_h_inv_bisection(spec: &PhiSpec, u: f64, abs_tol: f64) -> Result<f64> {
    check_domain(u >= 0.0 && u.is_finite(), "u", u)?;
    if u == 0.0 {
        return Ok(1.0);
    }
    let mut lo = 1.0_f64;
    let mut hi = f64::max(2.0, 2.0 * spec.h_inv(u));
    while spec.h(hi) < u {
        hi *= 2.0;
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..2048 {
        mid = 0.5 * (lo + hi);
        let hm = spec.h(mid);
        if (hm - u).abs() <= abs_tol {
            break;
        }
        if hm < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(mid)
}

/// `r(n) = φ(H_φ⁻¹(ε_b n)) / φ(1)`.
pub fn rate_r(spec: &PhiSpec, eps_b: f64, n: u64) -> Result<f64> {
    check_eps_b(eps_b)?;
    Ok(spec.rate_at(eps_b, n as f64))
}

/// `δ_k = ε_b φ′(H_φ⁻¹(ε_b k))`.
pub fn delta_k(spec: &PhiSpec, eps_b: f64, k: u64) -> Result<f64> {
    check_eps_b(eps_b)?;
    Ok(delta_unchecked(spec, eps_b, k as f64))
}

#[inline]
pub(crate) fn delta_unchecked(spec: &PhiSpec, eps_b: f64, k: f64) -> f64 {
    eps_b * spec.derivative(spec.h_inv(eps_b * k))
}

/// `H_k(v) = H_φ⁻¹(H_φ(v) + k) - H_φ⁻¹(k)`.
pub fn h_k(spec: &PhiSpec, v: f64, k: u64) -> Result<f64> {
    check_domain(v >= 1.0, "v", v)?;
    Ok(h_k_unchecked(spec, v, k as f64))
}

#[inline]
pub(crate) fn h_k_unchecked(spec: &PhiSpec, v: f64, k: f64) -> f64 {
    spec.h_inv(spec.h(v) + k) - spec.h_inv(k)
}

fn check_eps_b(eps_b: f64) -> Result<()> {
    check_domain(eps_b > 0.0 && eps_b < 1.0, "eps_b", eps_b)
}

/// Finite prefix `r(0..len)` of the rate sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    eps_b: f64,
    values: Vec<f64>,
}

impl RateTable {
    pub fn new(spec: &PhiSpec, eps_b: f64, len: usize) -> Result<Self> {
        check_eps_b(eps_b)?;
        let values = (0..len).map(|n| spec.rate_at(eps_b, n as f64)).collect();
        Ok(RateTable { eps_b, values })
    }

    pub fn eps_b(&self) -> f64 {
        self.eps_b
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Rate weighting applied to coupled-chain sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// `r ≡ 1`.
    Unit,
    /// `r(n)` for the given shape and `ε_b`.
    Poly { phi: PhiSpec, eps_b: f64 },
}

impl Rate {
    pub fn poly(phi: PhiSpec, eps_b: f64) -> Result<Self> {
        check_eps_b(eps_b)?;
        Ok(Rate::Poly { phi, eps_b })
    }

    #[inline]
    pub fn at(&self, n: usize) -> f64 {
        match self {
            Rate::Unit => 1.0,
            Rate::Poly { phi, eps_b } => phi.rate_at(*eps_b, n as f64),
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let both = left + right;
    let err = both - whole;
    // Below a few ulps of the panel value the estimate is rounding noise.
    let floor = 8.0 * f64::EPSILON * both.abs();
    if depth == 0 || err.abs() <= 15.0 * tol || err.abs() <= floor {
        return both + err / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Quadrature self-check of `H_φ` using the shared tolerance record.
pub fn big_h_self_check(spec: &PhiSpec, t: f64, tol: &Tolerances) -> Result<f64> {
    let closed = big_h(spec, t)?;
    let numeric = big_h_quadrature(spec, t, tol.quadrature_abs)?;
    if closed == 0.0 {
        Ok(numeric.abs())
    } else {
        Ok(((numeric - closed) / closed).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(a: f64, b: f64) -> PhiSpec {
        PhiSpec::polynomial(a, b).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * f64::max(1.0, b.abs())
    }

    #[test]
    fn phi_examples() {
        assert_eq!(eval_phi(&poly(0.5, 2.0), 1.0).unwrap(), 2.0);
        assert_eq!(eval_phi(&poly(0.0, 3.0), 100.0).unwrap(), 3.0);
        assert!(close(eval_phi(&poly(0.5, 2.0), 9.0).unwrap(), 6.0, 1e-15));
        assert!(eval_phi(&poly(0.5, 2.0), 0.5).is_err());
    }

    #[test]
    fn spec_domain() {
        assert!(PhiSpec::polynomial(1.0, 1.0).is_err());
        assert!(PhiSpec::polynomial(-0.1, 1.0).is_err());
        assert!(PhiSpec::polynomial(0.5, 0.0).is_err());
    }

    #[test]
    fn big_h_examples() {
        assert!(close(big_h(&poly(0.5, 1.0), 4.0).unwrap(), 2.0, 1e-15));
        assert_eq!(big_h(&poly(0.3, 1.7), 1.0).unwrap(), 0.0);
        assert!(close(big_h(&poly(0.0, 2.0), 3.0).unwrap(), 1.0, 1e-15));
        // Quadrature of ∫₁⁴ s^(-1/2) ds.
        let q = big_h_quadrature(&poly(0.5, 1.0), 4.0, 1e-12).unwrap();
        assert!(close(q, 2.0, 1e-10), "{q}");
        assert!(big_h(&poly(0.5, 1.0), 0.9).is_err());
    }

    #[test]
    fn big_h_inv_examples() {
        let s = poly(0.5, 1.0);
        assert!(close(big_h_inv(&s, 2.0).unwrap(), 4.0, 1e-15));
        assert!(close(
            big_h_inv_bisection(&s, 2.0, 1e-12).unwrap(),
            4.0,
            1e-9
        ));
        assert_eq!(big_h_inv(&poly(0.7, 3.0), 0.0).unwrap(), 1.0);
        assert!(close(big_h_inv(&poly(0.0, 2.0), 1.0).unwrap(), 3.0, 1e-15));
        assert!(big_h_inv(&s, -1.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let s = poly(0.5, 1.0);
        assert!(close(rate_r(&s, 0.5, 6).unwrap(), 2.5, 1e-14));
        // Composition route: φ(H⁻¹(ε_b n))/φ(1).
        let via = eval_phi(&s, big_h_inv(&s, 0.5 * 6.0).unwrap()).unwrap() / s.at_one();
        assert!(close(via, 2.5, 1e-14));
        assert_eq!(rate_r(&poly(0.4, 2.0), 0.3, 0).unwrap(), 1.0);
        for n in [0, 1, 17, 1000] {
            assert_eq!(rate_r(&poly(0.0, 5.0), 0.3, n).unwrap(), 1.0);
        }
        assert!(rate_r(&s, 1.0, 1).is_err());
        assert!(rate_r(&s, 0.0, 1).is_err());
    }

    #[test]
    fn delta_examples() {
        let s = poly(0.5, 1.0);
        assert!(close(delta_k(&s, 0.5, 6).unwrap(), 0.1, 1e-14));
        assert_eq!(delta_k(&poly(0.0, 4.0), 0.2, 9).unwrap(), 0.0);
        let mut prev = f64::INFINITY;
        for k in 1..5000 {
            let d = delta_k(&s, 0.5, k).unwrap();
            assert!(d <= prev && d >= 0.0);
            prev = d;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn h_k_examples() {
        let s = poly(0.3, 2.0);
        for v in [1.0, 2.5, 40.0] {
            assert!(close(h_k(&s, v, 0).unwrap(), v - 1.0, 1e-13));
        }
        assert!(close(h_k(&poly(0.0, 1.0), 5.0, 2).unwrap(), 4.0, 1e-14));
        // H(4) = 2 here, so h_2(4) = H⁻¹(4) - H⁻¹(2) = 9 - 4.
        assert!(close(h_k(&poly(0.5, 1.0), 4.0, 2).unwrap(), 5.0, 1e-14));
    }

    #[test]
    fn h_k_matches_integral_form() {
        // φ(1) ∫_0^{H(v)} r_φ(z + k) dz by composite Simpson.
        for s in [poly(0.5, 1.0), poly(0.25, 0.4), poly(0.8, 3.0)] {
            for (v, k) in [(4.0, 2u64), (1.5, 0), (30.0, 7)] {
                let top = s.h(v);
                let m = 20_000;
                let step = top / m as f64;
                let g = |z: f64| s.at_one() * s.rate_at(1.0, z + k as f64);
                let mut acc = g(0.0) + g(top);
                for i in 1..m {
                    acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * step);
                }
                let oracle = acc * step / 3.0;
                assert!(close(h_k(&s, v, k).unwrap(), oracle, 1e-10), "{v} {k}");
            }
        }
    }

    #[test]
    fn rate_table_prefix() {
        let t = RateTable::new(&poly(0.5, 1.0), 0.5, 8).unwrap();
        assert_eq!(t.get(0), Some(1.0));
        assert!(close(t.get(6).unwrap(), 2.5, 1e-14));
        assert!(t.values().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(t.get(8), None);
    }
}
