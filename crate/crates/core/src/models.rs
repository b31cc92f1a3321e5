//! Model parameter sets, characteristic functions of the centralized
//! log-return, tail profiles and moments.
//!
//! Every model is described by the characteristic function of
//! `X = log S_T - E[log S_T]`. The shift `E[log S_T]` carries the
//! risk-neutral drift, so that `E[S_T] = S_0 e^{rT}` for the stock models.
//! `Stable` and `Cauchy` are raw distributions of `X` (no stock attached).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inversion;
use crate::special::{normal_pdf, stable_tail_constant};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// Black–Scholes with volatility `sigma`.
    BlackScholes { sigma: f64 },
    /// Symmetric normal inverse Gaussian (`beta = 0`).
    Nig { alpha: f64, delta: f64 },
    VarianceGamma { sigma: f64, nu: f64, theta: f64 },
    /// Finite moment log stable, `alpha` in (1, 2).
    Fmls { alpha: f64, sigma: f64 },
    Stable {
        alpha: f64,
        beta: f64,
        scale: f64,
        location: f64,
    },
    /// Standard Cauchy distribution.
    Cauchy,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be finite and > 0"))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be finite"))
    }
}

impl ModelSpec {
    pub fn black_scholes(sigma: f64) -> Result<Self> {
        Self::BlackScholes { sigma }.validated()
    }

    pub fn nig(alpha: f64, delta: f64) -> Result<Self> {
        Self::Nig { alpha, delta }.validated()
    }

    pub fn variance_gamma(sigma: f64, nu: f64, theta: f64) -> Result<Self> {
        Self::VarianceGamma { sigma, nu, theta }.validated()
    }

    pub fn fmls(alpha: f64, sigma: f64) -> Result<Self> {
        Self::Fmls { alpha, sigma }.validated()
    }

    pub fn stable(alpha: f64, beta: f64, scale: f64, location: f64) -> Result<Self> {
        Self::Stable {
            alpha,
            beta,
            scale,
            location,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::BlackScholes { sigma } => positive("sigma", sigma),
            Self::Nig { alpha, delta } => {
                positive("alpha", alpha)?;
                positive("delta", delta)
            }
            Self::VarianceGamma { sigma, nu, theta } => {
                positive("sigma", sigma)?;
                positive("nu", nu)?;
                finite("theta", theta)
            }
            Self::Fmls { alpha, sigma } => {
                if !(alpha > 1.0 && alpha < 2.0) {
                    return Err(Error::invalid("alpha", alpha, "FMLS needs alpha in (1, 2)"));
                }
                positive("sigma", sigma)
            }
            Self::Stable {
                alpha,
                beta,
                scale,
                location,
            } => {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return Err(Error::invalid("alpha", alpha, "stable needs alpha in (0, 2]"));
                }
                if !(-1.0..=1.0).contains(&beta) {
                    return Err(Error::invalid("beta", beta, "stable needs beta in [-1, 1]"));
                }
                positive("scale", scale)?;
                finite("location", location)
            }
            Self::Cauchy => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::BlackScholes { .. } => "bs",
            Self::Nig { .. } => "nig",
            Self::VarianceGamma { .. } => "vg",
            Self::Fmls { .. } => "fmls",
            Self::Stable { .. } => "stable",
            Self::Cauchy => "cauchy",
        }
    }

    /// The FMLS log-return at horizon `maturity` as a stable law with
    /// `beta = -1`, `c = sigma T^{1/alpha}`, zero location.
    pub fn fmls_as_stable(&self, maturity: f64) -> Option<ModelSpec> {
        match *self {
            Self::Fmls { alpha, sigma } => Some(Self::Stable {
                alpha,
                beta: -1.0,
                scale: sigma * maturity.powf(1.0 / alpha),
                location: 0.0,
            }),
            _ => None,
        }
    }

    /// Largest `J` with the centralized density in `C_b^{J+1}`; `None` means
    /// not even `J = 0` is admissible. Smooth models return `u32::MAX`.
    pub fn smoothness(&self, maturity: f64) -> Option<u32> {
        match *self {
            Self::VarianceGamma { nu, .. } => {
                // C_b^{J+1} iff J + 2 < 2T/nu
                let bound = 2.0 * maturity / nu - 2.0;
                if bound <= 0.0 {
                    None
                } else {
                    let j = bound.ceil() - 1.0;
                    Some(j.max(0.0) as u32)
                }
            }
            _ => Some(u32::MAX),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketContext {
    pub spot: f64,
    pub rate: f64,
    pub maturity: f64,
}

impl MarketContext {
    pub fn new(spot: f64, rate: f64, maturity: f64) -> Result<Self> {
        positive("S0", spot)?;
        finite("r", rate)?;
        positive("T", maturity)?;
        Ok(Self {
            spot,
            rate,
            maturity,
        })
    }

    pub fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    Gauss {
        variance: f64,
    },
    Nig {
        alpha: f64,
        dt: f64,
    },
    VarianceGamma {
        half_var_nu: f64,
        theta_nu: f64,
        shape: f64,
        mean: f64,
    },
    Stable {
        alpha: f64,
        beta: f64,
        scale: f64,
    },
}

/// Characteristic function of the centralized log-return together with the
/// centering shift `mu = E[log S_T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralizedCF {
    model: ModelSpec,
    maturity: f64,
    mu: f64,
    kernel: Kernel,
}

/// Build the centralized characteristic function for `model` over `ctx`.
pub fn centralized_cf(model: &ModelSpec, ctx: &MarketContext) -> Result<CentralizedCF> {
    model.validate()?;
    let t = ctx.maturity;
    let log_forward = ctx.spot.ln() + ctx.rate * t;
    let (mu, kernel) = match *model {
        ModelSpec::BlackScholes { sigma } => (
            log_forward - 0.5 * sigma * sigma * t,
            Kernel::Gauss {
                variance: sigma * sigma * t,
            },
        ),
        ModelSpec::Nig { alpha, delta } => {
            if alpha <= 1.0 {
                return Err(Error::NoMartingale);
            }
            let dt = delta * t;
            (
                log_forward - dt * (alpha - (alpha * alpha - 1.0).sqrt()),
                Kernel::Nig { alpha, dt },
            )
        }
        ModelSpec::VarianceGamma { sigma, nu, theta } => {
            let base = 1.0 - theta * nu - 0.5 * sigma * sigma * nu;
            if base <= 0.0 {
                return Err(Error::NoMartingale);
            }
            let omega = base.ln() / nu;
            (
                log_forward + omega * t + theta * t,
                Kernel::VarianceGamma {
                    half_var_nu: 0.5 * sigma * sigma * nu,
                    theta_nu: theta * nu,
                    shape: t / nu,
                    mean: theta * t,
                },
            )
        }
        ModelSpec::Fmls { alpha, sigma } => (
            log_forward + sigma.powf(alpha) * t / (PI * alpha / 2.0).cos(),
            Kernel::Stable {
                alpha,
                beta: -1.0,
                scale: sigma * t.powf(1.0 / alpha),
            },
        ),
        ModelSpec::Stable {
            alpha,
            beta,
            scale,
            location,
        } => {
            let kernel = if alpha == 2.0 {
                Kernel::Gauss {
                    variance: 2.0 * scale * scale,
                }
            } else {
                Kernel::Stable { alpha, beta, scale }
            };
            (location, kernel)
        }
        ModelSpec::Cauchy => (
            0.0,
            Kernel::Stable {
                alpha: 1.0,
                beta: 0.0,
                scale: 1.0,
            },
        ),
    };
    Ok(CentralizedCF {
        model: *model,
        maturity: t,
        mu,
        kernel,
    })
}

impl CentralizedCF {
    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    /// `E[log S_T]` (the location for `Stable`, zero for `Cauchy`).
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `phi(u)` for real `u`.
    #[inline]
    pub fn eval(&self, u: f64) -> Complex64 {
        match self.kernel {
            Kernel::Gauss { variance } => Complex64::new((-0.5 * variance * u * u).exp(), 0.0),
            Kernel::Nig { alpha, dt } => Complex64::new((dt * (alpha - (alpha * alpha + u * u).sqrt())).exp(), 0.0),
            Kernel::VarianceGamma {
                half_var_nu,
                theta_nu,
                shape,
                mean,
            } => {
                let z = Complex64::new(1.0 + half_var_nu * u * u, -theta_nu * u);
                (-shape * z.ln() - Complex64::new(0.0, u * mean)).exp()
            }
            Kernel::Stable { alpha, beta, scale } => {
                if u == 0.0 {
                    return Complex64::new(1.0, 0.0);
                }
                let a = (scale * u).abs().powf(alpha);
                let skew = if alpha == 1.0 {
                    -(2.0 / PI) * u.abs().ln()
                } else {
                    (PI * alpha / 2.0).tan()
                };
                // -|cu|^a (1 - i beta sgn(u) Phi)
                Complex64::from_polar((-a).exp(), a * beta * u.signum() * skew)
            }
        }
    }

    /// `log phi(z)` continued to complex `z`, where an analytic continuation
    /// is available (Gaussian, NIG, VG, FMLS).
    pub fn log_eval_complex(&self, z: Complex64) -> Option<Complex64> {
        match self.kernel {
            Kernel::Gauss { variance } => Some(-0.5 * variance * z * z),
            Kernel::Nig { alpha, dt } => Some(dt * (alpha - (alpha * alpha + z * z).sqrt())),
            Kernel::VarianceGamma {
                half_var_nu,
                theta_nu,
                shape,
                mean,
            } => {
                let i = Complex64::i();
                let w = 1.0 - i * theta_nu * z + half_var_nu * z * z;
                Some(-shape * w.ln() - i * z * mean)
            }
            Kernel::Stable { .. } => match self.model {
                ModelSpec::Fmls { alpha, sigma } => {
                    // -T (i z sigma)^alpha sec(pi alpha / 2)
                    let w = Complex64::i() * z * sigma;
                    Some(-self.maturity * w.powf(alpha) / (PI * alpha / 2.0).cos())
                }
                _ => None,
            },
        }
    }

    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        self.log_eval_complex(z).map(|w| w.exp())
    }

    /// Characteristic function of `log S_T` at complex `z`.
    pub fn log_price_cf(&self, z: Complex64) -> Option<Complex64> {
        self.log_eval_complex(z)
            .map(|w| (w + Complex64::i() * z * self.mu).exp())
    }

    /// Cumulants `kappa_0..=kappa_n` of the centralized log-return
    /// (`kappa_0 = kappa_1 = 0`).
    pub fn cumulants(&self, n: u32) -> Result<Vec<f64>> {
        let n = n as usize;
        let mut k = vec![0.0; n + 1];
        match self.kernel {
            Kernel::Gauss { variance } => {
                if n >= 2 {
                    k[2] = variance;
                }
            }
            Kernel::VarianceGamma {
                half_var_nu,
                theta_nu,
                shape,
                ..
            } => {
                // K(s) = -shape log(1 - z(s)), z(s) = theta nu s + sigma^2 nu s^2 / 2
                let mut z = vec![0.0; n + 1];
                if n >= 1 {
                    z[1] = theta_nu;
                }
                if n >= 2 {
                    z[2] = half_var_nu;
                }
                let mut power = z.clone();
                let mut series = vec![0.0; n + 1];
                for m in 1..=n {
                    for (s, p) in series.iter_mut().zip(&power) {
                        *s += p / m as f64;
                    }
                    power = poly_mul_truncated(&power, &z, n);
                }
                let mut factorial = 1.0;
                for (m, km) in k.iter_mut().enumerate().skip(1) {
                    factorial *= m as f64;
                    *km = shape * series[m] * factorial;
                }
                k[1] = 0.0;
            }
            Kernel::Nig { alpha, .. } => {
                let coeffs = self.taylor_log_cf(0.5 * alpha, n)?;
                let mut factorial = 1.0;
                for m in 1..=n {
                    factorial *= m as f64;
                    // log phi(u) = sum kappa_m (iu)^m / m!
                    let i_pow = Complex64::i().powu(m as u32);
                    k[m] = (coeffs[m] * factorial / i_pow).re;
                }
                k[1] = 0.0;
            }
            Kernel::Stable { .. } => {
                return Err(Error::MomentDoesNotExist {
                    order: 2,
                    model: self.model.name(),
                })
            }
        }
        Ok(k)
    }

    /// Taylor coefficients of `log phi` around zero by the trapezoid rule on
    /// a circle of the given radius.
    fn taylor_log_cf(&self, radius: f64, n: usize) -> Result<Vec<Complex64>> {
        const POINTS: usize = 128;
        let samples: Vec<Complex64> = (0..POINTS)
            .map(|p| {
                let z = Complex64::from_polar(radius, 2.0 * PI * p as f64 / POINTS as f64);
                self.log_eval_complex(z).ok_or(Error::NoClosedForm {
                    model: self.model.name(),
                })
            })
            .collect::<Result<_>>()?;
        Ok((0..=n)
            .map(|m| {
                let sum: Complex64 = samples
                    .iter()
                    .enumerate()
                    .map(|(p, g)| g * Complex64::from_polar(1.0, -2.0 * PI * (m * p) as f64 / POINTS as f64))
                    .sum();
                sum / (POINTS as f64 * radius.powi(m as i32))
            })
            .collect())
    }
}

fn poly_mul_truncated(a: &[f64], b: &[f64], degree: usize) -> Vec<f64> {
    let mut out = vec![0.0; degree + 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(degree + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `n`-th central moment of the log-return, `n` even and at least 2.
pub fn central_moment(model: &ModelSpec, ctx: &MarketContext, n: u32) -> Result<f64> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid("n", f64::from(n), "moment order must be even and >= 2"));
    }
    let heavy = match *model {
        ModelSpec::Fmls { .. } | ModelSpec::Cauchy => true,
        ModelSpec::Stable { alpha, .. } => alpha < 2.0,
        _ => false,
    };
    if heavy {
        return Err(Error::MomentDoesNotExist {
            order: n,
            model: model.name(),
        });
    }
    let cf = centralized_cf(model, ctx)?;
    let kappa = cf.cumulants(n)?;
    Ok(moments_from_cumulants(&kappa)[n as usize])
}

/// Raw moments from cumulants: `m_n = sum_{k=1}^{n} C(n-1, k-1) kappa_k m_{n-k}`.
pub fn moments_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    let n = kappa.len().saturating_sub(1);
    let mut m = vec![0.0; n + 1];
    m[0] = 1.0;
    for order in 1..=n {
        let mut binom = 1.0; // C(order-1, 0)
        let mut acc = 0.0;
        for k in 1..=order {
            acc += binom * kappa[k] * m[order - k];
            binom *= (order - k) as f64 / k as f64;
        }
        m[order] = acc;
    }
    m
}

/// Exponential tail `|f(x)| <= c1 exp(-c2 |x|)` for `|x| >= onset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiHeavyTail {
    pub c1: f64,
    pub c2: f64,
    pub onset: f64,
}

/// Pareto tail `|f(x)| <= c3 |x|^{-1-alpha}` for `|x| >= onset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTail {
    pub c3: f64,
    pub alpha: f64,
    pub onset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailProfile {
    SemiHeavy(SemiHeavyTail),
    Heavy(HeavyTail),
}

impl TailProfile {
    pub fn onset(&self) -> f64 {
        match self {
            Self::SemiHeavy(t) => t.onset,
            Self::Heavy(t) => t.onset,
        }
    }

    /// The claimed majorant of the density at `x` (meaningful for `|x| >= onset`).
    pub fn majorant(&self, x: f64) -> f64 {
        match *self {
            Self::SemiHeavy(SemiHeavyTail { c1, c2, .. }) => c1 * (-c2 * x.abs()).exp(),
            Self::Heavy(HeavyTail { c3, alpha, .. }) => c3 * x.abs().powf(-1.0 - alpha),
        }
    }
}

const C1_SAFETY: f64 = 1.1;

/// Tail constants for the centralized density.
pub fn tail_profile(model: &ModelSpec, ctx: &MarketContext) -> Result<TailProfile> {
    model.validate()?;
    let t = ctx.maturity;
    let heavy = |alpha: f64, beta: f64, scale: f64| {
        TailProfile::Heavy(HeavyTail {
            c3: alpha * stable_tail_constant(alpha) * (1.0 + beta.abs()) / 2.0 * scale.powf(alpha),
            alpha,
            onset: 10.0 * scale,
        })
    };
    let gaussian = |variance: f64| {
        let sd = variance.sqrt();
        let onset = 6.0 * sd;
        let c2 = onset / variance;
        // f(x) e^{c2 x} is decreasing beyond the onset
        let ln_c1 = C1_SAFETY.ln() + (normal_pdf(onset / sd) / sd).ln() + c2 * onset;
        TailProfile::SemiHeavy(SemiHeavyTail {
            c1: ln_c1.exp(),
            c2,
            onset,
        })
    };
    match *model {
        ModelSpec::BlackScholes { sigma } => Ok(gaussian(sigma * sigma * t)),
        ModelSpec::Stable { alpha: 2.0, scale, .. } => Ok(gaussian(2.0 * scale * scale)),
        ModelSpec::Nig { alpha, delta } => {
            let onset = 6.0 * (delta * t / alpha).sqrt();
            Ok(TailProfile::SemiHeavy(nig_tail(alpha, delta * t, onset)))
        }
        ModelSpec::VarianceGamma { sigma, nu, theta } => {
            let s2 = sigma * sigma;
            let root = (theta * theta / (s2 * s2) + 2.0 / (nu * s2)).sqrt();
            let rate = (root - theta / s2).min(root + theta / s2);
            let power = (t / nu - 1.0).max(0.0);
            let variance = (s2 + theta * theta * nu) * t;
            let onset = (6.0 * variance.sqrt()).max(2.0 * power / rate);
            semi_heavy_from_density(model, ctx, onset, rate - power / onset)
        }
        ModelSpec::Fmls { alpha, sigma } => Ok(heavy(alpha, -1.0, sigma * t.powf(1.0 / alpha))),
        ModelSpec::Stable {
            alpha, beta, scale, ..
        } => Ok(heavy(alpha, beta, scale)),
        ModelSpec::Cauchy => Ok(TailProfile::Heavy(HeavyTail {
            c3: 1.0 / PI,
            alpha: 1.0,
            onset: 1.0,
        })),
    }
}

/// Symmetric NIG with `delta' = delta T`: `f(x) = (alpha delta'/pi) e^{alpha delta'} K_1(alpha r) / r`,
/// `r = sqrt(delta'^2 + x^2)`. With `K_1(z) <= sqrt(pi/2z) e^{-z} (1 + 3/(8z))`,
/// `f(x) e^{alpha |x|}` is dominated by a smooth function of `|x|` whose
/// supremum over `[onset, inf)` is found by a fine scan. The supremum may lie
/// far beyond the onset when `alpha delta'` is large.
fn nig_tail(alpha: f64, delta: f64, onset: f64) -> SemiHeavyTail {
    let ln_front = (alpha * delta / PI).ln() + alpha * delta + 0.5 * (PI / (2.0 * alpha)).ln();
    let ln_dominant = |x: f64| {
        let r = delta.hypot(x);
        // r - x computed without cancellation
        let gap = delta * delta / (r + x);
        ln_front - 1.5 * r.ln() + (3.0 / (8.0 * alpha * r)).ln_1p() - alpha * gap
    };
    // the maximiser is near alpha delta^2 / 3; past it the function decreases
    let end = onset.max(alpha * delta * delta) * 64.0;
    let points = 8192;
    let step = (end / onset).ln() / f64::from(points);
    let ln_sup = (0..=points)
        .map(|i| ln_dominant(onset * (step * f64::from(i)).exp()))
        .fold(f64::NEG_INFINITY, f64::max);
    SemiHeavyTail {
        c1: (C1_SAFETY.ln() + ln_sup).exp(),
        c2: alpha,
        onset,
    }
}

fn semi_heavy_from_density(model: &ModelSpec, ctx: &MarketContext, onset: f64, c2: f64) -> Result<TailProfile> {
    let cf = centralized_cf(model, ctx)?;
    let f_right = inversion::density(&cf, onset)?;
    let f_left = inversion::density(&cf, -onset)?;
    let c1 = C1_SAFETY * f_right.max(f_left).max(0.0) * (c2 * onset).exp();
    Ok(TailProfile::SemiHeavy(SemiHeavyTail { c1, c2, onset }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx1() -> MarketContext {
        MarketContext::new(100.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(ModelSpec::black_scholes(0.0).is_err());
        assert!(ModelSpec::black_scholes(f64::NAN).is_err());
        assert!(ModelSpec::nig(-1.0, 1.0).is_err());
        assert!(ModelSpec::variance_gamma(0.1, 0.0, 0.0).is_err());
        assert!(ModelSpec::fmls(2.0, 0.1).is_err());
        assert!(ModelSpec::fmls(1.0, 0.1).is_err());
        assert!(ModelSpec::stable(2.1, 0.0, 1.0, 0.0).is_err());
        assert!(ModelSpec::stable(1.5, 1.2, 1.0, 0.0).is_err());
        assert!(MarketContext::new(100.0, 0.0, 0.0).is_err());
        assert!(MarketContext::new(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn bs_cf_is_centred_gaussian() {
        let cf = centralized_cf(&ModelSpec::black_scholes(0.2).unwrap(), &ctx1()).unwrap();
        for &u in &[0.0, 0.5, 3.0, -7.0] {
            let expected = (-u * u * 0.02f64).exp();
            assert!((cf.eval(u) - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
        assert!((cf.mu() - (100f64.ln() - 0.02)).abs() < 1e-15);
    }

    #[test]
    fn nig_cf_matches_closed_form() {
        let ctx = MarketContext::new(100.0, 0.0, 0.5).unwrap();
        let cf = centralized_cf(&ModelSpec::nig(3.0, 0.4).unwrap(), &ctx).unwrap();
        for &u in &[0.0, 1.0, 10.0] {
            let dt: f64 = 0.4 * 0.5;
            let expected = (-dt * (9.0f64 + u * u).sqrt() + dt * 3.0).exp();
            assert!((cf.eval(u).re - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn nig_without_exponential_moment_is_rejected() {
        let r = centralized_cf(&ModelSpec::nig(1.0, 1.0).unwrap(), &ctx1());
        assert_eq!(r, Err(Error::NoMartingale));
    }

    #[test]
    fn fmls_modulus() {
        let (alpha, sigma) = (1.5597, 0.1486);
        let cf = centralized_cf(&ModelSpec::fmls(alpha, sigma).unwrap(), &ctx1()).unwrap();
        let expected = (-sigma.powf(alpha)).exp();
        assert!((cf.eval(1.0).norm() - expected).abs() < 1e-15);
        assert!((cf.eval(-1.0).norm() - expected).abs() < 1e-15);
    }

    #[test]
    fn real_and_complex_evaluation_agree() {
        let ctx = MarketContext::new(100.0, 0.03, 0.7).unwrap();
        let models = [
            ModelSpec::black_scholes(0.3).unwrap(),
            ModelSpec::nig(4.0, 0.5).unwrap(),
            ModelSpec::variance_gamma(0.12, 0.2, -0.14).unwrap(),
            ModelSpec::fmls(1.5597, 0.1486).unwrap(),
        ];
        for m in &models {
            let cf = centralized_cf(m, &ctx).unwrap();
            for &u in &[-12.0, -0.3, 0.7, 5.0, 40.0] {
                let a = cf.eval(u);
                let b = cf.eval_complex(Complex64::new(u, 0.0)).unwrap();
                assert!((a - b).norm() < 1e-13, "{} at {u}: {a} vs {b}", m.name());
            }
        }
    }

    #[test]
    fn martingale_condition() {
        // E[S_T] = phi_{log S_T}(-i) = S_0 e^{rT}
        let ctx = MarketContext::new(90.0, 0.05, 2.0).unwrap();
        let models = [
            ModelSpec::black_scholes(0.3).unwrap(),
            ModelSpec::nig(4.0, 0.5).unwrap(),
            ModelSpec::variance_gamma(0.12, 0.2, -0.14).unwrap(),
            ModelSpec::fmls(1.5597, 0.1486).unwrap(),
        ];
        for m in &models {
            let cf = centralized_cf(m, &ctx).unwrap();
            let forward = cf.log_price_cf(Complex64::new(0.0, -1.0)).unwrap();
            assert!((forward.re - 90.0 * (0.1f64).exp()).abs() < 1e-10, "{}", m.name());
            assert!(forward.im.abs() < 1e-10);
        }
    }

    #[test]
    fn moments_of_gaussian() {
        let bs = ModelSpec::black_scholes(0.2).unwrap();
        let s2: f64 = 0.04;
        assert!((central_moment(&bs, &ctx1(), 2).unwrap() - s2).abs() < 1e-16);
        assert!((central_moment(&bs, &ctx1(), 4).unwrap() - 0.0048).abs() < 1e-16);
        assert!((central_moment(&bs, &ctx1(), 8).unwrap() - 105.0 * s2.powi(4)).abs() < 1e-18);
    }

    #[test]
    fn moment_errors() {
        let fmls = ModelSpec::fmls(1.5597, 0.1486).unwrap();
        assert_eq!(
            central_moment(&fmls, &ctx1(), 4),
            Err(Error::MomentDoesNotExist { order: 4, model: "fmls" })
        );
        assert!(central_moment(&ModelSpec::Cauchy, &ctx1(), 2).is_err());
        assert!(central_moment(&ModelSpec::black_scholes(0.2).unwrap(), &ctx1(), 3).is_err());
        let gauss_stable = ModelSpec::stable(2.0, 0.0, 0.5, 0.0).unwrap();
        assert!((central_moment(&gauss_stable, &ctx1(), 2).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vg_cumulants_closed_form() {
        // theta = 0: kappa_2 = sigma^2 T, kappa_4 = 3 sigma^4 nu T, kappa_6 = 30 sigma^6 nu^2 T
        let ctx = MarketContext::new(100.0, 0.0, 0.25).unwrap();
        let cf = centralized_cf(&ModelSpec::variance_gamma(0.1, 0.2, 0.0).unwrap(), &ctx).unwrap();
        let k = cf.cumulants(6).unwrap();
        assert!((k[2] - 0.0025).abs() < 1e-18);
        assert!((k[4] - 3.0 * 1e-4 * 0.2 * 0.25).abs() < 1e-18);
        assert!((k[6] - 30.0 * 1e-6 * 0.04 * 0.25).abs() < 1e-20);
        assert_eq!(k[3], 0.0);
    }

    #[test]
    fn contour_cumulants_match_series() {
        // Same VG model through the generic contour route.
        let ctx = MarketContext::new(100.0, 0.0, 0.8).unwrap();
        let cf = centralized_cf(&ModelSpec::variance_gamma(0.15, 0.3, -0.2).unwrap(), &ctx).unwrap();
        let series = cf.cumulants(8).unwrap();
        let coeffs = cf.taylor_log_cf(1.0, 8).unwrap();
        let mut factorial = 1.0;
        for m in 2..=8usize {
            factorial *= m as f64;
            let kappa = (coeffs[m] * factorial / Complex64::i().powu(m as u32)).re;
            assert!(
                (kappa - series[m]).abs() < 1e-8 * series[m].abs().max(1e-6),
                "kappa_{m}: {kappa} vs {}",
                series[m]
            );
        }
    }

    #[test]
    fn nig_cumulants_match_binomial_series() {
        // log phi = dt alpha (1 - sqrt(1 + u^2/alpha^2)) gives
        // kappa_{2m} = (-1)^{m+1} dt alpha C(1/2, m) (2m)! alpha^{-2m}
        let (alpha, delta, t) = (2.5, 0.7, 1.3);
        let ctx = MarketContext::new(100.0, 0.0, t).unwrap();
        let cf = centralized_cf(&ModelSpec::nig(alpha, delta).unwrap(), &ctx).unwrap();
        let k = cf.cumulants(8).unwrap();
        let dt = delta * t;
        let mut binom = 1.0;
        let mut factorial = 1.0;
        for m in 1..=4 {
            binom *= (0.5 - (m - 1) as f64) / m as f64;
            factorial *= ((2 * m - 1) * (2 * m)) as f64;
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            let expected = sign * dt * alpha * binom * factorial * alpha.powi(-2 * m);
            assert!((k[2 * m as usize] - expected).abs() < 1e-12 * expected.abs(), "m={m}");
        }
    }

    #[test]
    fn vg_smoothness_index() {
        let vg = ModelSpec::variance_gamma(0.1, 0.2, 0.0).unwrap();
        assert_eq!(vg.smoothness(0.25), Some(0)); // T in (nu, 3nu/2)
        assert_eq!(vg.smoothness(0.15), None); // T < nu
        assert_eq!(vg.smoothness(0.35), Some(1));
        assert_eq!(ModelSpec::black_scholes(0.2).unwrap().smoothness(1.0), Some(u32::MAX));
    }

    #[test]
    fn heavy_tail_constants() {
        let (alpha, sigma) = (1.5597f64, 0.1486f64);
        let fmls = ModelSpec::fmls(alpha, sigma).unwrap();
        let TailProfile::Heavy(h) = tail_profile(&fmls, &ctx1()).unwrap() else {
            panic!("FMLS must be heavy tailed")
        };
        let expected = alpha * (1.0 - alpha) / (crate::special::gamma(2.0 - alpha) * (PI * alpha / 2.0).cos())
            * sigma.powf(alpha);
        assert!((h.c3 - expected).abs() < 1e-15);
        assert_eq!(h.alpha, alpha);

        let TailProfile::Heavy(c) = tail_profile(&ModelSpec::Cauchy, &ctx1()).unwrap() else {
            panic!()
        };
        // x (1 - F(x)) -> 1/pi for the standard Cauchy; alpha C_alpha (1+0)/2 = 1/pi
        let x: f64 = 1e7;
        let survival = 0.5 - x.atan() / PI;
        assert!((x * survival - c.c3).abs() < 1e-8);
        assert!((c.c3 - 1.0 / PI).abs() < 1e-16);
    }
}
