//! Density and density derivatives by Fourier inversion of the centralized
//! characteristic function:
//! `f^(j)(x) = (1/pi) int_0^inf Re{(-iu)^j e^{-iux} phi(u)} du`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::models::CentralizedCF;
use crate::quadrature::{integrate_oscillatory, integrate_to_infinity, integrate_with_limit, Tolerance};
use crate::summation::CompensatedSum;

/// Where an envelope `e(u) >= 0` on `(0, inf)` carries its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Support {
    /// Largest sampled `e(u)`.
    pub peak: f64,
    /// Abscissa of `peak`.
    pub at: f64,
    /// Largest sampled `u e(u)`, a proxy for the size of the integral.
    pub mass: f64,
    /// Abscissa of `mass`.
    pub mass_at: f64,
    /// Point past which the remaining integral is negligible, if found.
    pub cutoff: Option<f64>,
}

const SCAN_START: i32 = -80;
const SCAN_END: i32 = 440;

/// Scan `e` on a geometric grid `u = 2^{k/4}`, `1e-6 < u < 1e33`.
pub(crate) fn effective_support<E: Fn(f64) -> f64>(envelope: E) -> Support {
    let grid: Vec<(f64, f64)> = (SCAN_START..=SCAN_END)
        .map(|k| {
            let u = 2f64.powf(f64::from(k) / 4.0);
            let e = envelope(u);
            (u, if e.is_finite() { e } else { 0.0 })
        })
        .collect();
    let (mut peak, mut at, mut mass, mut mass_index) = (0.0, 0.0, 0.0, 0);
    for (i, &(u, e)) in grid.iter().enumerate() {
        if e > peak {
            peak = e;
            at = u;
        }
        if u * e > mass {
            mass = u * e;
            mass_index = i;
        }
    }
    const NEGLIGIBLE: f64 = 1e-18;
    const CONFIRM: usize = 12;
    let mut cutoff = None;
    for i in mass_index..grid.len().saturating_sub(CONFIRM) {
        let small = |&(u, e): &(f64, f64)| u * e < NEGLIGIBLE * mass;
        if grid[i..i + CONFIRM].iter().all(small) {
            cutoff = Some(grid[i].0.max(at));
            break;
        }
    }
    Support {
        peak,
        at,
        mass,
        mass_at: grid[mass_index].0,
        cutoff,
    }
}

/// Integral over `[0, inf)` of a function whose envelope was scanned into
/// `support`.
pub(crate) fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, support: &Support, tol: Tolerance) -> Result<f64> {
    match support.cutoff {
        Some(cutoff) => integrate_dyadic(f, support.mass_at, cutoff, tol),
        None => {
            let split = support.mass_at * 2f64.powi(20);
            let head = integrate_dyadic(&mut f, support.mass_at, split, tol)?;
            let tail = integrate_to_infinity(&mut f, split, tol)?;
            Ok(head + tail.value)
        }
    }
}

/// Integral over `[0, end]` on dyadic panels around `centre`, so that a
/// narrow bump inside a long range is not missed.
pub(crate) fn integrate_dyadic<F: FnMut(f64) -> f64>(mut f: F, centre: f64, end: f64, tol: Tolerance) -> Result<f64> {
    let mut edges = vec![0.0];
    let mut b = centre * 2f64.powi(-30);
    while b < end {
        edges.push(b);
        b *= 2.0;
    }
    edges.push(end);
    let share = Tolerance::new(tol.abs / edges.len() as f64, tol.rel);
    let mut total = CompensatedSum::new();
    for w in edges.windows(2) {
        total.add(integrate_with_limit(&mut f, w[0], w[1], share, 2000)?.value);
    }
    Ok(total.value())
}

fn minus_i_pow(j: u32) -> Complex64 {
    match j % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// `j`-th derivative of the centralized density at `x`.
pub fn density_derivative(cf: &CentralizedCF, order: u32, x: f64) -> Result<f64> {
    let j = order as i32;
    let envelope = |u: f64| u.powi(j) * cf.eval(u).norm() / PI;
    let support = effective_support(envelope);
    let phase = minus_i_pow(order);
    let integrand = |u: f64| {
        if u == 0.0 && order > 0 {
            return 0.0;
        }
        (phase * Complex64::from_polar(1.0, -u * x) * cf.eval(u)).re * u.powi(j) / PI
    };
    let tol = Tolerance::new(2e-13 * support.mass.max(f64::MIN_POSITIVE), 1e-12);
    let half_period = if x == 0.0 { f64::INFINITY } else { PI / x.abs() };
    // envelope-based stopping is only valid past the envelope's maximum
    let tail_envelope = |u: f64| if u < support.at { f64::INFINITY } else { envelope(u) };

    let estimate = match support.cutoff {
        Some(cutoff) if cutoff < 40.0 * half_period => {
            return integrate_dyadic(integrand, support.mass_at, cutoff, tol);
        }
        Some(cutoff) => {
            let panels = (cutoff / half_period).ceil() as usize + 100;
            integrate_oscillatory(integrand, half_period, half_period, tail_envelope, tol, panels)?
        }
        None if x == 0.0 => return integrate_half_line(integrand, &support, tol),
        None => integrate_oscillatory(integrand, half_period, half_period, tail_envelope, tol, 200_000)?,
    };
    Ok(estimate.value)
}

/// Centralized density at `x`.
pub fn density(cf: &CentralizedCF, x: f64) -> Result<f64> {
    density_derivative(cf, 0, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{centralized_cf, MarketContext, ModelSpec};
    use crate::special::normal_pdf;

    fn ctx(t: f64) -> MarketContext {
        MarketContext::new(100.0, 0.0, t).unwrap()
    }

    #[test]
    fn gaussian_density_and_derivatives() {
        let cf = centralized_cf(&ModelSpec::black_scholes(0.2).unwrap(), &ctx(1.0)).unwrap();
        let s = 0.2;
        for &x in &[0.0, 0.1, -0.35, 1.0] {
            let z: f64 = x / s;
            let f = normal_pdf(z) / s;
            assert!((density(&cf, x).unwrap() - f).abs() < 1e-12, "x={x}");
            let f1 = -z / s * f;
            assert!((density_derivative(&cf, 1, x).unwrap() - f1).abs() < 1e-10);
            let f2 = (z * z - 1.0) / (s * s) * f;
            assert!((density_derivative(&cf, 2, x).unwrap() - f2).abs() < 1e-9);
        }
    }

    #[test]
    fn cauchy_density_far_out() {
        let cf = centralized_cf(&ModelSpec::Cauchy, &ctx(1.0)).unwrap();
        for &x in &[0.0, 0.5, 3.0, -40.0, 500.0] {
            let f = 1.0 / (PI * (1.0 + x * x));
            let got = density(&cf, x).unwrap();
            assert!((got - f).abs() < 1e-10 * f.max(1e-3), "x={x}: {got} vs {f}");
        }
    }

    #[test]
    fn vg_algebraic_decay_integrates() {
        // T/nu = 1.25: phi decays like u^{-2.5}
        let cf = centralized_cf(&ModelSpec::variance_gamma(0.1, 0.2, 0.0).unwrap(), &ctx(0.25)).unwrap();
        let total = crate::quadrature::integrate(
            |x| density(&cf, x).unwrap(),
            -1.0,
            1.0,
            Tolerance::new(1e-9, 1e-9),
        )
        .unwrap();
        assert!((total.value - 1.0).abs() < 1e-6, "{}", total.value);
    }

    #[test]
    fn support_of_gaussian_envelope() {
        let s = effective_support(|u: f64| (-u * u / 2.0).exp());
        assert_eq!(s.peak, (-(2f64.powf(-20.0)).powi(2) / 2.0).exp());
        let cutoff = s.cutoff.unwrap();
        assert!(cutoff > 8.0 && cutoff < 12.0, "{cutoff}");
        assert!(effective_support(|u: f64| 1.0 / (1.0 + u)).cutoff.is_none());
    }
}
