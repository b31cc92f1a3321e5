//! Randomized checks that the a-priori bounds dominate brute-force values:
//! the series truncation bound against the Parseval tail of the restricted
//! cosine series, and the `B(L)` bounds against partial sums of the
//! aliasing series.

use std::f64::consts::PI;

use cos_core::bounds::{
    bl_bound_heavy, bl_bound_semiheavy, bl_bruteforce, hj_closed_form, series_truncation_bound, truncation_error_l2,
    TailIntegration,
};
use cos_core::inversion::{density, density_derivative};
use cos_core::special::normal_pdf;
use cos_core::{centralized_cf, tail_profile, MarketContext, ModelSpec, TailProfile};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub brute_force: f64,
    pub bound: f64,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.brute_force <= self.bound
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteReport {
    pub configurations: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds())
    }
}

/// `He_j(z)` by the three-term recurrence.
fn hermite(j: u32, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, z);
    if j == 0 {
        return prev;
    }
    for k in 1..j {
        let next = z * cur - f64::from(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn gauss_derivative(s: f64, j: u32, x: f64) -> f64 {
    let z = x / s;
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * hermite(j, z) * normal_pdf(z) / s.powi(j as i32 + 1)
}

/// `f(x) = Im{1 / (x - ic)} / pi`, so `f^(j)(x) = Im{(-1)^j j! (x - ic)^{-j-1}} / pi`.
fn cauchy_derivative(c: f64, j: u32, x: f64) -> f64 {
    let fact: f64 = (1..=j).map(f64::from).product();
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * fact * Complex64::new(x, -c).powi(-(j as i32) - 1).im / PI
}

#[allow(clippy::too_many_arguments)]
fn truncation_check(
    label: String,
    model: &ModelSpec,
    ctx: &MarketContext,
    f: impl Fn(f64) -> f64,
    derivative: impl Fn(u32, f64) -> Result<f64>,
    l: f64,
    n: usize,
    j: u32,
) -> Result<Check> {
    let boundary = (1..=j)
        .map(|k| Ok(derivative(k, -l)?.abs() + derivative(k, l)?.abs()))
        .collect::<Result<Vec<f64>>>()?;
    let h = hj_closed_form(model, ctx, j + 1)?;
    let bound = series_truncation_bound(&h, &boundary, l, n as u64, j)?;
    let brute_force = truncation_error_l2(f, l, n, (4 * n).max(1024));
    Ok(Check {
        label,
        brute_force,
        bound,
    })
}

/// Draws `cases` configurations (Gaussian, Cauchy-type stable and symmetric
/// NIG in turn) from a seeded generator.
pub fn bound_validity_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut report = SuiteReport::default();
    for case in 0..cases {
        let n = rng.gen_range(8..=256usize);
        match case % 3 {
            0 => {
                let sigma = rng.gen_range(0.05..0.6);
                let ctx = MarketContext::new(100.0, 0.0, rng.gen_range(0.25..2.0))?;
                let model = ModelSpec::black_scholes(sigma)?;
                let s = sigma * ctx.maturity.sqrt();
                let (l, j) = (s * rng.gen_range(3.0..12.0), rng.gen_range(1..=8u32));
                let f = |x: f64| normal_pdf(x / s) / s;
                let label = format!("gauss s={s:.4} L={l:.4} N={n} J={j}");
                report.checks.push(truncation_check(
                    label,
                    &model,
                    &ctx,
                    f,
                    |k, x| Ok(gauss_derivative(s, k, x)),
                    l,
                    n,
                    j,
                )?);
                let TailProfile::SemiHeavy(tail) = tail_profile(&model, &ctx)? else {
                    unreachable!("gaussian tails are semi-heavy")
                };
                let lb = tail.onset * rng.gen_range(1.0..2.0);
                let m = rng.gen_range(tail.onset..=lb);
                let b = bl_bruteforce(f, lb, 512, TailIntegration::Direct { reach: 20.0 * s })?;
                report.checks.push(Check {
                    label: format!("gauss B(L) s={s:.4} L={lb:.4} M={m:.4}"),
                    brute_force: b.partial_sum.sqrt(),
                    bound: bl_bound_semiheavy(tail.c1, tail.c2, lb, m),
                });
            }
            1 => {
                let c = rng.gen_range(0.2..3.0);
                let ctx = MarketContext::new(100.0, 0.0, 1.0)?;
                let model = ModelSpec::stable(1.0, 0.0, c, 0.0)?;
                let (l, j) = (c * rng.gen_range(1.0..30.0), rng.gen_range(1..=6u32));
                let f = |x: f64| c / (PI * (c * c + x * x));
                let label = format!("cauchy c={c:.4} L={l:.4} N={n} J={j}");
                report.checks.push(truncation_check(
                    label,
                    &model,
                    &ctx,
                    f,
                    |k, x| Ok(cauchy_derivative(c, k, x)),
                    l,
                    n,
                    j,
                )?);
                let TailProfile::Heavy(tail) = tail_profile(&model, &ctx)? else {
                    unreachable!("stable tails are heavy")
                };
                let lb = tail.onset * rng.gen_range(1.0..4.0);
                let cf = centralized_cf(&model, &ctx)?;
                let b = bl_bruteforce(f, lb, 1024, TailIntegration::Complement(&cf))?;
                report.checks.push(Check {
                    label: format!("cauchy B(L) c={c:.4} L={lb:.4}"),
                    brute_force: b.partial_sum.sqrt(),
                    bound: bl_bound_heavy(tail.c3, tail.alpha, lb),
                });
            }
            _ => {
                let alpha = rng.gen_range(2.0..30.0);
                let delta = rng.gen_range(0.2..1.5);
                let ctx = MarketContext::new(100.0, 0.0, rng.gen_range(0.25..2.0))?;
                let model = ModelSpec::nig(alpha, delta)?;
                let cf = centralized_cf(&model, &ctx)?;
                let TailProfile::SemiHeavy(tail) = tail_profile(&model, &ctx)? else {
                    unreachable!("nig tails are semi-heavy")
                };
                let f = |x: f64| density(&cf, x).unwrap_or(f64::NAN);
                let (l, j, n) = (tail.onset * rng.gen_range(0.5..1.5), rng.gen_range(1..=4u32), n.min(96));
                let label = format!("nig alpha={alpha:.3} delta={delta:.3} T={:.3} L={l:.4} N={n} J={j}", ctx.maturity);
                let deriv = |k: u32, x: f64| Ok(density_derivative(&cf, k, x)?);
                report
                    .checks
                    .push(truncation_check(label, &model, &ctx, f, deriv, l, n, j)?);
                let lb = tail.onset * rng.gen_range(1.0..1.5);
                let m = rng.gen_range(tail.onset..=lb);
                let b = bl_bruteforce(f, lb, 256, TailIntegration::Complement(&cf))?;
                report.checks.push(Check {
                    label: format!("nig B(L) alpha={alpha:.3} delta={delta:.3} L={lb:.4} M={m:.4}"),
                    brute_force: b.partial_sum.sqrt(),
                    bound: bl_bound_semiheavy(tail.c1, tail.c2, lb, m),
                });
            }
        }
        report.configurations += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_eq!(hermite(2, 2.0), 3.0);
        assert_eq!(hermite(3, 2.0), 2.0);
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let h = 1e-5;
        for j in 0..4 {
            for x in [-0.7, 0.1, 2.3] {
                let fd = (gauss_derivative(0.4, j, x + h) - gauss_derivative(0.4, j, x - h)) / (2.0 * h);
                assert!((fd - gauss_derivative(0.4, j + 1, x)).abs() < 1e-5 * (1.0 + fd.abs()));
                let fd = (cauchy_derivative(0.8, j, x + h) - cauchy_derivative(0.8, j, x - h)) / (2.0 * h);
                assert!((fd - cauchy_derivative(0.8, j + 1, x)).abs() < 1e-5 * (1.0 + fd.abs()));
            }
        }
        assert!((cauchy_derivative(1.0, 0, 0.0) - 1.0 / PI).abs() < 1e-16);
    }
}
