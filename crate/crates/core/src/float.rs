//! Thin wrappers over `libm` so call sites read like `std` float methods.

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

/// `base^exponent` with the convention `0^0 = 1`.
#[inline]
pub(crate) fn pow_zero_one(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else {
        powf(base, exponent)
    }
}
