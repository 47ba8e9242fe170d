//! Standard normal density and distribution function.
//!
//! `cdf` goes through the complementary error function so that both tails keep
//! full relative precision (libm's `erfc` is accurate to about one ulp).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// ln(2π)
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Standard normal density φ(x).
#[inline]
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function Φ(x).
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}
