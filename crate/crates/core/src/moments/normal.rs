//! Standard normal distribution primitives.
//!
//! The CDF is evaluated through the complementary error function so that
//! both tails keep full relative precision. `libm::erfc` is the fdlibm
//! rational approximation (error below one ulp over the whole real line).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `P(Z <= x)` for a standard normal `Z`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `P(Z >= x)`, computed without cancellation for large `x`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `P(lo <= Z <= hi)`; uses whichever tail keeps the subtraction away from 1.
pub fn std_normal_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo >= 0.0 {
        std_normal_sf(lo) - std_normal_sf(hi)
    } else {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    }
}
