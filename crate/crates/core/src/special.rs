//! Thin wrappers over `libm` plus a few combinatorial helpers evaluated in
//! the log domain.

use std::f64::consts::{PI, SQRT_2};

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln(n!)`
pub fn ln_factorial(n: u32) -> f64 {
    ln_gamma(f64::from(n) + 1.0)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Tail constant `C_alpha` of a stable law: `x^alpha P(X > x)` tends to
/// `C_alpha (1 + beta)/2 c^alpha`.
pub fn stable_tail_constant(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-15 {
        2.0 / PI
    } else {
        (1.0 - alpha) / (gamma(2.0 - alpha) * (PI * alpha / 2.0).cos())
    }
}
