//! Independent prices used as oracles: the Carr–Madan damped Fourier
//! integral, Black–Scholes formulas, the Cauchy distribution function and
//! densities by Fourier inversion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inversion;
use crate::models::{CentralizedCF, MarketContext, ModelSpec};
use crate::special::normal_cdf;
use crate::summation::CompensatedSum;

/// Simpson grid for the Carr–Madan integral over `[0, range]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrMadanConfig {
    /// Number of Simpson intervals (even, at least 16).
    pub terms: usize,
    pub damping: f64,
    pub range: f64,
}

impl CarrMadanConfig {
    /// `2^17` intervals, damping 0.1, range 1200.
    pub const REFERENCE: CarrMadanConfig = CarrMadanConfig {
        terms: 1 << 17,
        damping: 0.1,
        range: 1200.0,
    };

    pub const STANDARD: CarrMadanConfig = CarrMadanConfig {
        terms: 4096,
        damping: 1.5,
        range: 1024.0,
    };

    pub fn new(terms: usize, damping: f64, range: f64) -> Result<Self> {
        let cfg = Self { terms, damping, range };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.terms < 16 || !self.terms.is_multiple_of(2) {
            return Err(Error::invalid("terms", self.terms as f64, "must be even and >= 16"));
        }
        if !(self.damping > 0.0) {
            return Err(Error::invalid("damping", self.damping, "must be > 0"));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(Error::invalid("range", self.range, "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Offset of the first node from `u = 0`.
const FIRST_NODE: f64 = 1e-10;

fn damping_admissible(model: &ModelSpec, damping: f64) -> bool {
    let p = 1.0 + damping;
    match *model {
        ModelSpec::BlackScholes { .. } | ModelSpec::Fmls { .. } => true,
        ModelSpec::Nig { alpha, .. } => p < alpha,
        ModelSpec::VarianceGamma { sigma, nu, theta } => 1.0 - theta * nu * p - 0.5 * sigma * sigma * nu * p * p > 0.0,
        ModelSpec::Stable { .. } | ModelSpec::Cauchy => false,
    }
}

/// European call by Simpson's rule applied to the damped call transform.
pub fn carr_madan_call(cf: &CentralizedCF, ctx: &MarketContext, strike: f64, cfg: &CarrMadanConfig) -> Result<f64> {
    cfg.validate()?;
    if !(strike > 0.0) {
        return Err(Error::invalid("K", strike, "must be > 0"));
    }
    let gamma = cfg.damping;
    if !damping_admissible(cf.model(), gamma) {
        return Err(Error::DampingInadmissible {
            damping: gamma,
            model: cf.model().name(),
        });
    }
    let k = strike.ln();
    let discount = ctx.discount();
    let shift = Complex64::new(0.0, -(gamma + 1.0));
    let integrand = |u: f64| -> Result<f64> {
        let phi = cf
            .log_price_cf(Complex64::new(u, 0.0) + shift)
            .ok_or(Error::DampingInadmissible {
                damping: gamma,
                model: cf.model().name(),
            })?;
        let denom = Complex64::new(gamma * gamma + gamma - u * u, (2.0 * gamma + 1.0) * u);
        Ok((Complex64::from_polar(1.0, -u * k) * discount * phi / denom).re)
    };
    let h = cfg.range / cfg.terms as f64;
    let mut sum = CompensatedSum::new();
    for j in 0..=cfg.terms {
        let weight = if j == 0 || j == cfg.terms {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum.add(weight * integrand(FIRST_NODE + h * j as f64)? * h / 3.0);
    }
    // the sliver [0, FIRST_NODE] is not negligible: the integrand is O(S_0^{1+gamma}) there
    sum.add(0.5 * FIRST_NODE * (integrand(0.0)? + integrand(FIRST_NODE)?));
    Ok((-gamma * k).exp() / PI * sum.value())
}

fn d1_d2(ctx: &MarketContext, sigma: f64, strike: f64) -> (f64, f64) {
    let vol = sigma * ctx.maturity.sqrt();
    let d1 = ((ctx.spot / strike).ln() + (ctx.rate + 0.5 * sigma * sigma) * ctx.maturity) / vol;
    (d1, d1 - vol)
}

pub fn black_scholes_put(ctx: &MarketContext, sigma: f64, strike: f64) -> f64 {
    let (d1, d2) = d1_d2(ctx, sigma, strike);
    strike * ctx.discount() * normal_cdf(-d2) - ctx.spot * normal_cdf(-d1)
}

pub fn black_scholes_call(ctx: &MarketContext, sigma: f64, strike: f64) -> f64 {
    let (d1, d2) = d1_d2(ctx, sigma, strike);
    ctx.spot * normal_cdf(d1) - strike * ctx.discount() * normal_cdf(d2)
}

/// Distribution function of the standard Cauchy law.
pub fn cauchy_cdf(x: f64) -> f64 {
    0.5 + x.atan() / PI
}

/// Centralized density on a grid of abscissae.
pub fn density_by_inversion(cf: &CentralizedCF, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter().map(|&x| inversion::density(cf, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::centralized_cf;
    use crate::special::normal_pdf;

    #[test]
    fn cauchy_cdf_values() {
        assert_eq!(cauchy_cdf(0.0), 0.5);
        assert!((cauchy_cdf(1.23) - (0.5 + 1.23f64.atan() / PI)).abs() < 1e-16);
        assert!((cauchy_cdf(1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn bs_parity() {
        let ctx = MarketContext::new(100.0, 0.04, 0.7).unwrap();
        for k in [70.0, 100.0, 130.0] {
            let c = black_scholes_call(&ctx, 0.25, k);
            let p = black_scholes_put(&ctx, 0.25, k);
            assert!((c - p - (100.0 - k * ctx.discount())).abs() < 1e-12);
        }
        let atm = MarketContext::new(100.0, 0.0, 1.0).unwrap();
        assert!((black_scholes_call(&atm, 0.2, 100.0) - 7.965567455405804).abs() < 1e-10);
    }

    #[test]
    fn carr_madan_reproduces_black_scholes() {
        let ctx = MarketContext::new(100.0, 0.0, 1.0).unwrap();
        let cf = centralized_cf(&ModelSpec::black_scholes(0.2).unwrap(), &ctx).unwrap();
        let cm = carr_madan_call(&cf, &ctx, 100.0, &CarrMadanConfig::REFERENCE).unwrap();
        assert!((cm - black_scholes_call(&ctx, 0.2, 100.0)).abs() < 1e-8, "{cm}");
    }

    #[test]
    fn carr_madan_grid_refinement() {
        let ctx = MarketContext::new(100.0, 0.0, 1.0).unwrap();
        let cf = centralized_cf(&ModelSpec::black_scholes(0.2).unwrap(), &ctx).unwrap();
        let coarse = carr_madan_call(&cf, &ctx, 100.0, &CarrMadanConfig::REFERENCE).unwrap();
        let fine_cfg = CarrMadanConfig::new(1 << 18, 0.1, 1200.0).unwrap();
        let fine = carr_madan_call(&cf, &ctx, 100.0, &fine_cfg).unwrap();
        assert!((coarse - fine).abs() < 1e-10);
    }

    #[test]
    fn inadmissible_damping() {
        let ctx = MarketContext::new(100.0, 0.0, 1.0).unwrap();
        let cf = centralized_cf(&ModelSpec::nig(2.0, 0.5).unwrap(), &ctx).unwrap();
        let cfg = CarrMadanConfig::new(4096, 1.5, 1024.0).unwrap();
        assert!(matches!(
            carr_madan_call(&cf, &ctx, 100.0, &cfg),
            Err(Error::DampingInadmissible { .. })
        ));
        let cauchy = centralized_cf(&ModelSpec::Cauchy, &ctx).unwrap();
        assert!(carr_madan_call(&cauchy, &ctx, 1.0, &CarrMadanConfig::REFERENCE).is_err());
        assert!(CarrMadanConfig::new(15, 0.1, 1.0).is_err());
    }

    #[test]
    fn inversion_grid_matches_gaussian() {
        let ctx = MarketContext::new(100.0, 0.0, 1.0).unwrap();
        let cf = centralized_cf(&ModelSpec::black_scholes(0.2).unwrap(), &ctx).unwrap();
        let xs: Vec<f64> = (0..=40).map(|i| -1.0 + 0.05 * i as f64).collect();
        let f = density_by_inversion(&cf, &xs).unwrap();
        for (x, v) in xs.iter().zip(&f) {
            assert!((v - normal_pdf(x / 0.2) / 0.2).abs() < 1e-10);
        }
    }
}
