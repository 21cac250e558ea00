//! Standard normal distribution function.
//!
//! Backed by the `libm` port of the musl `erf`/`erfc`, which is accurate to
//! about one ulp; the upper tail is taken from `erfc` directly so small
//! p-values keep their relative accuracy.

use std::f64::consts::FRAC_1_SQRT_2;

/// `P(Z <= z)`.
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `P(Z > z)`.
pub fn sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}
