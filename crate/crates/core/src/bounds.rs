//! Bounds on density derivatives, on the error of truncating the cosine
//! series of the restricted density, and on the aliasing term `B(L)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::inversion::{self, effective_support, integrate_half_line};
use crate::models::{CentralizedCF, MarketContext, ModelSpec};
use crate::quadrature::{kronrod_nodes, Tolerance};
use crate::special::{ln_factorial, ln_gamma};
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundSource {
    ClosedFormStable,
    ClosedFormGauss,
    ClosedFormNig,
    /// `(1/pi) int_0^inf u^j |phi(u)| du` by quadrature.
    NumericIntegral,
    /// Maximum of `|f^(j)|` located on a grid of inverted values; an
    /// estimate rather than a certified bound.
    SupByInversion,
}

/// `H_j >= sup |f^(j)|`. `ln_value` is authoritative; `value` may overflow
/// for very large orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBound {
    pub order: u32,
    pub value: f64,
    pub ln_value: f64,
    pub source: BoundSource,
}

impl DerivativeBound {
    fn from_ln(order: u32, ln_value: f64, source: BoundSource) -> Self {
        Self {
            order,
            value: ln_value.exp(),
            ln_value,
            source,
        }
    }

    fn from_value(order: u32, value: f64, source: BoundSource) -> Self {
        Self {
            order,
            value,
            ln_value: value.ln(),
            source,
        }
    }
}

/// `ln Gamma((j+1)/alpha) - ln(pi alpha) - (j+1) ln c`.
fn ln_stable_bound(alpha: f64, scale: f64, j: u32) -> f64 {
    let j1 = f64::from(j) + 1.0;
    ln_gamma(j1 / alpha) - (PI * alpha).ln() - j1 * scale.ln()
}

/// Gaussian with standard deviation `s`: the integral bound in closed form,
/// `2^{(j-1)/2} Gamma((j+1)/2) / (pi s^{j+1})`.
fn ln_gauss_bound(s: f64, j: u32) -> f64 {
    let j = f64::from(j);
    0.5 * (j - 1.0) * 2f64.ln() + ln_gamma(0.5 * (j + 1.0)) - PI.ln() - (j + 1.0) * s.ln()
}

/// Closed-form `H_j` for the stable family (incl. Gaussian and Cauchy) and
/// symmetric NIG.
pub fn hj_closed_form(model: &ModelSpec, ctx: &MarketContext, j: u32) -> Result<DerivativeBound> {
    model.validate()?;
    let t = ctx.maturity;
    let (ln_value, source) = match *model {
        ModelSpec::BlackScholes { sigma } => (ln_gauss_bound(sigma * t.sqrt(), j), BoundSource::ClosedFormGauss),
        ModelSpec::Stable { alpha: 2.0, scale, .. } => {
            (ln_gauss_bound(scale * 2f64.sqrt(), j), BoundSource::ClosedFormGauss)
        }
        ModelSpec::Stable { alpha, scale, .. } => (ln_stable_bound(alpha, scale, j), BoundSource::ClosedFormStable),
        ModelSpec::Fmls { alpha, sigma } => (
            ln_stable_bound(alpha, sigma * t.powf(1.0 / alpha), j),
            BoundSource::ClosedFormStable,
        ),
        ModelSpec::Cauchy => (ln_stable_bound(1.0, 1.0, j), BoundSource::ClosedFormStable),
        ModelSpec::Nig { alpha, delta } => {
            let dt = delta * t;
            (
                dt * alpha + ln_factorial(j) - PI.ln() - (f64::from(j) + 1.0) * dt.ln(),
                BoundSource::ClosedFormNig,
            )
        }
        ModelSpec::VarianceGamma { .. } => return Err(Error::NoClosedForm { model: model.name() }),
    };
    Ok(DerivativeBound::from_ln(j, ln_value, source))
}

/// `H_j = (1/pi) int_0^inf u^j |phi(u)| du` by adaptive quadrature.
pub fn hj_numeric(cf: &CentralizedCF, j: u32) -> Result<DerivativeBound> {
    let jf = f64::from(j);
    let ln_envelope = |u: f64| jf * u.ln() + cf.eval(u).norm().ln();
    // normalise by the largest sampled value so that large j cannot overflow
    let ln_peak = (-80..=440)
        .map(|k| ln_envelope(2f64.powf(f64::from(k) / 4.0)))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !ln_peak.is_finite() {
        return Err(Error::IntegralDiverged { order: j });
    }
    let envelope = |u: f64| {
        if u == 0.0 {
            return if j == 0 { (-ln_peak).exp() } else { 0.0 };
        }
        (ln_envelope(u) - ln_peak).exp()
    };
    let support = effective_support(envelope);
    // u e(u) still sizeable at the end of the scan: the integral diverges
    let far = 2f64.powf(110.0);
    if far * envelope(far) > 1e-6 * support.mass {
        return Err(Error::IntegralDiverged { order: j });
    }
    let tol = Tolerance::new(1e-14 * support.mass, 1e-10);
    let scaled = integrate_half_line(envelope, &support, tol).map_err(|_| Error::IntegralDiverged { order: j })?;
    if !(scaled > 0.0) {
        return Err(Error::IntegralDiverged { order: j });
    }
    Ok(DerivativeBound::from_ln(
        j,
        scaled.ln() + ln_peak - PI.ln(),
        BoundSource::NumericIntegral,
    ))
}

/// `max |f^(j)(x)|` over `points` equispaced abscissae in
/// `[-half_width, half_width]`, refined by golden-section search around the
/// best grid point.
pub fn hj_sup_by_inversion(cf: &CentralizedCF, j: u32, half_width: f64, points: usize) -> Result<DerivativeBound> {
    if !(half_width > 0.0) || points < 3 {
        return Err(Error::invalid("half_width", half_width, "needs a positive width and >= 3 points"));
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..points {
        let x = -half_width + h * i as f64;
        let v = inversion::density_derivative(cf, j, x)?.abs();
        if v > best.1 {
            best = (x, v);
        }
    }
    let value = |x: f64| inversion::density_derivative(cf, j, x).map(f64::abs);
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (value(c)?, value(d)?);
    for _ in 0..60 {
        if (b - a).abs() < 1e-10 * h.max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = value(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = value(d)?;
        }
    }
    let sup = best.1.max(fc).max(fd);
    Ok(DerivativeBound::from_value(j, sup, BoundSource::SupByInversion))
}

/// Upper bound on `||f_L - sum' a_k e_k||_2`, the error of truncating the
/// cosine series of `f` restricted to `[-L, L]` after `N` terms.
///
/// `h_next` bounds the derivative of order `order + 1`; `boundary[j - 1]`
/// holds `|f^(j)(-L)| + |f^(j)(L)|` for `j = 1..=order`.
pub fn series_truncation_bound(h_next: &DerivativeBound, boundary: &[f64], l: f64, n: u64, order: u32) -> Result<f64> {
    if h_next.order != order + 1 {
        return Err(Error::invalid("H", f64::from(h_next.order), "needs the bound of order J + 1"));
    }
    if boundary.len() < order as usize {
        return Err(Error::invalid("boundary", boundary.len() as f64, "needs J boundary values"));
    }
    if !(l > 0.0) || n == 0 {
        return Err(Error::invalid("L", l, "needs L > 0 and N >= 1"));
    }
    let nf = n as f64;
    if order == 0 {
        return Ok(4.0 * h_next.value * l / (PI * nf.sqrt()));
    }
    let (ln2, lnpi) = (2f64.ln(), PI.ln());
    let ratio = (l / nf).ln();
    let mut total = CompensatedSum::new();
    for (j, &b) in (1..=order).zip(boundary) {
        if b > 0.0 {
            let jf = f64::from(j);
            total.add((((jf + 1.0) * ln2) - jf.ln() - (jf + 1.0) * lnpi + jf * ratio + b.ln()).exp());
        }
    }
    let jf = f64::from(order);
    let ln_rest =
        (jf + 2.0) * ln2 + h_next.ln_value - jf.ln() - (jf + 1.0) * lnpi + (jf + 1.0) * l.ln() - jf * nf.ln();
    total.add(ln_rest.exp());
    Ok(total.value())
}

/// Bound on `sqrt(B(L))` for exponential tails `C1 e^{-C2 |x|}`, valid for
/// `L >= M >= onset`.
pub fn bl_bound_semiheavy(c1: f64, c2: f64, l: f64, m: f64) -> f64 {
    let mc = m * c2;
    2.0 * PI * c1 / (6.0 * c2).sqrt() * (-c2 * l).exp() * (1.0 + 1.0 / mc + 0.5 / (mc * mc)).sqrt()
}

/// Bound on `sqrt(B(L))` for Pareto tails `C3 |x|^{-1-alpha}`, `L >= onset`.
pub fn bl_bound_heavy(c3: f64, alpha: f64, l: f64) -> f64 {
    2.0 * c3 * (1.0 / (alpha * alpha) + 2.0 / 3.0).sqrt() * l.powf(-0.5 - alpha)
}

/// How the tail integrals `T_k = int_{|x|>L} f(x) cos(k pi (x+L)/(2L)) dx`
/// are obtained.
#[derive(Debug, Clone, Copy)]
pub enum TailIntegration<'a> {
    /// Direct quadrature of both tails out to `L + reach`; suited to fast
    /// decaying densities.
    Direct { reach: f64 },
    /// `T_k = L c_k - int_{-L}^{L} f cos(...)`, with `c_k` from the
    /// characteristic function; suited to slowly decaying tails.
    Complement(&'a CentralizedCF),
}

/// Partial sum of the series defining `B(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceB {
    /// `sum_{k=0}^{k_max} T_k^2 / L`, a lower bound on `B(L)`.
    pub partial_sum: f64,
    /// Rough size of the omitted terms (assumes `T_k ~ k^{-2}`); not a bound.
    pub tail_estimate: f64,
    /// The `T_k` themselves.
    pub terms: Vec<f64>,
}

/// Composite 21-point Kronrod nodes on `[a, b]` fine enough for cosines up
/// to frequency `k_max pi / (2L)`.
fn composite_nodes(a: f64, b: f64, l: f64, k_max: usize) -> Vec<(f64, f64)> {
    // at most two periods of the fastest cosine per panel
    let period = 4.0 * l / k_max.max(1) as f64;
    let panels = (((b - a) / (2.0 * period)).ceil() as usize).max(64);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| kronrod_nodes(a + h * p as f64, a + h * (p + 1) as f64))
        .collect()
}

/// `sum_i w_i cos(k theta_i)` for `k = 0..=k_max`, where each node carries
/// weight `w_i` and angle `theta_i`.
fn cosine_moments(nodes: &[(f64, f64)], k_max: usize) -> Vec<f64> {
    // Chebyshev recurrence, reseeded from cos() every RESEED steps
    const RESEED: usize = 32;
    let two_cos: Vec<f64> = nodes.iter().map(|&(theta, _)| 2.0 * theta.cos()).collect();
    let mut prev = vec![0.0; nodes.len()];
    let mut cur = vec![0.0; nodes.len()];
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k % RESEED == 0 || k < 2 {
            for (i, &(theta, _)) in nodes.iter().enumerate() {
                cur[i] = (k as f64 * theta).cos();
                prev[i] = if k == 0 { theta.cos() } else { ((k as f64 - 1.0) * theta).cos() };
            }
        } else {
            for i in 0..nodes.len() {
                let next = two_cos[i] * cur[i] - prev[i];
                prev[i] = cur[i];
                cur[i] = next;
            }
        }
        let s: CompensatedSum = nodes.iter().zip(&cur).map(|(&(_, w), c)| w * c).collect();
        out.push(s.value());
    }
    out
}

/// Cosine coefficients `a_k = (1/L) int_{-L}^{L} f(x) cos(k pi (x+L)/(2L)) dx`
/// for `k = 0..=k_max` by composite quadrature.
pub fn restricted_coefficients<F: Fn(f64) -> f64>(density: F, l: f64, k_max: usize) -> Vec<f64> {
    let nodes: Vec<(f64, f64)> = composite_nodes(-l, l, l, k_max)
        .into_iter()
        .map(|(x, w)| (PI * (x + l) / (2.0 * l), w * density(x) / l))
        .collect();
    cosine_moments(&nodes, k_max)
}

/// `||f_L - sum'_{k<=N} a_k e_k||_2` through Parseval: `sqrt(L sum_{k>N} a_k^2)`,
/// summed to `k_max` plus an estimate of the remainder.
pub fn truncation_error_l2<F: Fn(f64) -> f64>(density: F, l: f64, n: usize, k_max: usize) -> f64 {
    let k_max = k_max.max(n + 64);
    let a = restricted_coefficients(density, l, k_max);
    let mut s: CompensatedSum = a[n + 1..].iter().map(|x| x * x).collect();
    s.add(remainder_estimate(&a));
    (l * s.value()).sqrt()
}

/// `sum_{k>K} x_k^2` assuming `x_k ~ k^{-2}` beyond the last 16 entries.
fn remainder_estimate(x: &[f64]) -> f64 {
    let k = x.len();
    let window = &x[k.saturating_sub(16)..];
    let mean_sq = window.iter().map(|v| v * v).sum::<f64>() / window.len() as f64;
    mean_sq * k as f64 / 3.0
}

/// Brute-force partial sum of `B(L) = sum_k T_k^2 / L`. A test oracle.
pub fn bl_bruteforce<F: Fn(f64) -> f64>(density: F, l: f64, k_max: usize, method: TailIntegration) -> Result<BruteForceB> {
    if !(l > 0.0) {
        return Err(Error::invalid("L", l, "must be > 0"));
    }
    let terms = match method {
        TailIntegration::Direct { reach } => {
            if !(reach > 0.0) {
                return Err(Error::invalid("reach", reach, "must be > 0"));
            }
            // x = L + y contributes (-1)^k f(L+y) cos(w y), x = -L - y contributes f(-L-y) cos(w y)
            let grid = composite_nodes(0.0, reach, l, k_max);
            let theta = |y: f64| PI * y / (2.0 * l);
            let right: Vec<(f64, f64)> = grid.iter().map(|&(y, w)| (theta(y), w * density(l + y))).collect();
            let left: Vec<(f64, f64)> = grid.iter().map(|&(y, w)| (theta(y), w * density(-l - y))).collect();
            let r = cosine_moments(&right, k_max);
            let lft = cosine_moments(&left, k_max);
            r.iter()
                .zip(&lft)
                .enumerate()
                .map(|(k, (a, b))| if k % 2 == 0 { a + b } else { b - a })
                .collect::<Vec<f64>>()
        }
        TailIntegration::Complement(cf) => {
            let inner = restricted_coefficients(&density, l, k_max);
            let c = crate::cos::cos_coefficients(cf, l, k_max);
            c.iter().zip(&inner).map(|(ck, ak)| l * (ck - ak)).collect()
        }
    };
    if terms.iter().any(|t| !t.is_finite()) {
        return Err(Error::QuadratureFailure {
            estimate: f64::NAN,
            error: f64::NAN,
        });
    }
    let partial: CompensatedSum = terms.iter().map(|t| t * t / l).collect();
    Ok(BruteForceB {
        partial_sum: partial.value(),
        tail_estimate: remainder_estimate(&terms) / l,
        terms,
    })
}
