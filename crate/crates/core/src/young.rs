//! Young-function pairs `Ψ₁(x)Ψ₂(y) ≤ x + y` and the weighted sup-norm.
//!
//! The power family is `Ψ₁(x) = a₁ x^ξ`, `Ψ₂(y) = a₂ y^(1-ξ)`. With
//! `a₁ = ξ^(-ξ)` and `a₂ = (1-ξ)^(-(1-ξ))` the defining inequality is the
//! weighted AM–GM inequality, with equality on the line `x/ξ = y/(1-ξ)`.

use alloc::vec::Vec;

use crate::error::check_domain;
use crate::float::{pow_zero_one, powf};
use crate::ratefn::PhiSpec;
use crate::{Error, Result};

/// Relative shrink applied to interior prefactors so the floating-point
/// product `Ψ₁(x)Ψ₂(y)` never exceeds `x + y` on the equality line.
const PREFACTOR_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoungPair {
    xi: f64,
    a1: f64,
    a2: f64,
}

impl YoungPair {
    /// A pair with arbitrary prefactors. Nothing is checked beyond the domain;
    /// use [`check_young`] to test the defining inequality.
    pub fn with_prefactors(xi: f64, a1: f64, a2: f64) -> Result<Self> {
        check_domain((0.0..=1.0).contains(&xi), "xi", xi)?;
        check_domain(a1 > 0.0 && a1.is_finite(), "a1", a1)?;
        check_domain(a2 > 0.0 && a2.is_finite(), "a2", a2)?;
        Ok(YoungPair { xi, a1, a2 })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    #[inline]
    pub fn psi1(&self, x: f64) -> f64 {
        self.a1 * pow_zero_one(x, self.xi)
    }

    #[inline]
    pub fn psi2(&self, y: f64) -> f64 {
        self.a2 * pow_zero_one(y, 1.0 - self.xi)
    }

    /// `Ψ₁(x)Ψ₂(y) - (x + y)`; non-positive for a valid pair.
    pub fn violation(&self, x: f64, y: f64) -> f64 {
        self.psi1(x) * self.psi2(y) - (x + y)
    }
}

/// The weighted AM–GM pair for `ξ ∈ [0, 1]`; `ξ = 1` gives `(x, 1)` and
/// `ξ = 0` gives `(1, y)`.
pub fn make_pair(xi: f64) -> Result<YoungPair> {
    check_domain((0.0..=1.0).contains(&xi), "xi", xi)?;
    if xi == 0.0 || xi == 1.0 {
        return YoungPair::with_prefactors(xi, 1.0, 1.0);
    }
    let a1 = powf(xi, -xi) * (1.0 - PREFACTOR_GUARD);
    let a2 = powf(1.0 - xi, -(1.0 - xi)) * (1.0 - PREFACTOR_GUARD);
    YoungPair::with_prefactors(xi, a1, a2)
}

/// The pair with reciprocal prefactors `ξ⁻¹`, `(1-ξ)⁻¹` for `ξ ∈ (0, 1)`.
///
/// This pair violates the Young inequality near `x = y = 1`; it is kept to
/// document and regression-test that fact.
pub fn reciprocal_pair(xi: f64) -> Result<YoungPair> {
    check_domain(xi > 0.0 && xi < 1.0, "xi", xi)?;
    YoungPair::with_prefactors(xi, 1.0 / xi, 1.0 / (1.0 - xi))
}

/// Largest value of `Ψ₁(x)Ψ₂(y) - (x + y)` over a log-spaced `grid × grid`
/// set covering `[1, 1e8]²`.
pub fn check_young(pair: &YoungPair, grid: usize) -> Result<f64> {
    if grid < 2 {
        return Err(Error::Domain {
            what: "grid",
            value: grid as f64,
        });
    }
    let points: Vec<f64> = (0..grid)
        .map(|i| powf(10.0, 8.0 * i as f64 / (grid - 1) as f64))
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for &x in &points {
        let p1 = pair.psi1(x);
        for &y in &points {
            worst = worst.max(p1 * pair.psi2(y) - (x + y));
        }
    }
    Ok(worst)
}

/// The weight `W(x) = Ψ₂(φ(V(x))/φ(1))` tabulated on the states.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightW {
    pub phi: PhiSpec,
    pub pair: YoungPair,
    values: Vec<f64>,
}

impl WeightW {
    pub fn new(phi: PhiSpec, pair: YoungPair, v: &[f64]) -> Result<Self> {
        let phi1 = phi.at_one();
        let mut values = Vec::with_capacity(v.len());
        for &vx in v {
            check_domain(vx >= 1.0, "V", vx)?;
            values.push(pair.psi2(phi.value(vx) / phi1));
        }
        Ok(WeightW { phi, pair, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `‖f‖_W = max_x |f(x)| / W(x)`.
pub fn weighted_norm(f: &[f64], w: &WeightW) -> Result<f64> {
    if f.len() != w.values.len() {
        return Err(Error::DimensionMismatch {
            expected: w.values.len(),
            found: f.len(),
        });
    }
    let mut norm = 0.0_f64;
    for (fx, wx) in f.iter().zip(&w.values) {
        check_domain(wx.is_finite() && *wx > 0.0, "W", *wx)?;
        check_domain(fx.is_finite(), "f", *fx)?;
        norm = norm.max(fx.abs() / wx);
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_pairs_are_exact() {
        let p = make_pair(1.0).unwrap();
        assert_eq!((p.psi1(7.0), p.psi2(9.0)), (7.0, 1.0));
        let p = make_pair(0.0).unwrap();
        assert_eq!((p.psi1(7.0), p.psi2(9.0)), (1.0, 9.0));
        assert!(make_pair(1.5).is_err());
        assert!(make_pair(-0.1).is_err());
    }

    #[test]
    fn half_pair_is_am_gm() {
        let p = make_pair(0.5).unwrap();
        for (x, y) in [(1.0, 1.0), (4.0, 9.0), (1e6, 1.0), (123.0, 123.0)] {
            let prod = p.psi1(x) * p.psi2(y);
            assert!((prod - 2.0 * crate::float::sqrt(x * y)).abs() <= 1e-12 * prod);
            assert!(prod <= x + y);
        }
        assert!(check_young(&p, 64).unwrap() <= 0.0);
    }

    #[test]
    fn identity_pair_check() {
        assert!(check_young(&make_pair(1.0).unwrap(), 5).unwrap() <= 0.0);
        assert!(check_young(&make_pair(1.0).unwrap(), 1).is_err());
    }

    #[test]
    fn reciprocal_prefactors_violate_at_one() {
        let p = reciprocal_pair(0.5).unwrap();
        assert_eq!(p.violation(1.0, 1.0), 2.0);
        let bad = YoungPair::with_prefactors(0.5, 2.0, 2.0).unwrap();
        assert_eq!(bad.violation(1.0, 1.0), 2.0);
        // 4√(xy) - (x + y) grows along the diagonal.
        assert!(check_young(&bad, 64).unwrap() >= 2.0);
    }

    #[test]
    fn weighted_norms() {
        let phi = PhiSpec::polynomial(0.5, 3.0).unwrap();
        let pair = make_pair(0.5).unwrap();
        let v = [1.0, 4.0, 16.0, 100.0];
        let w = WeightW::new(phi, pair, &v).unwrap();
        assert_eq!(weighted_norm(&[0.0; 4], &w).unwrap(), 0.0);
        let ones = weighted_norm(w.values(), &w).unwrap();
        assert!((ones - 1.0).abs() < 1e-15);
        // f = V^{α(1-ξ)} gives the constant ratio 1/a₂, independent of β.
        let f: Vec<f64> = v.iter().map(|x| powf(*x, 0.25)).collect();
        let n = weighted_norm(&f, &w).unwrap();
        assert!((n - 1.0 / pair.a2()).abs() < 1e-14);
        assert!(weighted_norm(&[1.0], &w).is_err());
    }
}
