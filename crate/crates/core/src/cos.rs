//! The COS pricing sum: cosine coefficients of the density read off the
//! characteristic function, closed-form payoff coefficients and the
//! truncated series.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use crate::bounds::BoundSource;
use crate::error::{Error, Result};
use crate::models::{CentralizedCF, MarketContext};
use crate::summation::CompensatedSum;

/// Where a parameter value came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Manual,
    /// Markov bound on the payoff mass outside `[-M, M]` from the `n`-th moment.
    MomentBound { moments: u32 },
    /// Pareto tail mass outside `[-M, M]`.
    TailMass,
    /// `L = M` chosen together with `M`.
    SameAsM,
    /// Aliasing bound on `B(L)` for Pareto tails.
    AliasingBound,
    /// Series truncation bound with derivative order `j`.
    SeriesTruncation { order: u32, h: BoundSource },
    /// The lower clamp `N >= 4L/pi`.
    LowerClamp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub m: Source,
    pub l: Source,
    pub n: Source,
}

impl Provenance {
    pub const MANUAL: Provenance = Provenance {
        m: Source::Manual,
        l: Source::Manual,
        n: Source::Manual,
    };
}

/// Payoff half-range `M`, density half-range `L >= M` and number of terms `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosParameters {
    pub m: f64,
    pub l: f64,
    pub n: usize,
    pub provenance: Provenance,
}

impl CosParameters {
    pub fn new(m: f64, l: f64, n: usize) -> Result<Self> {
        Self::with_provenance(m, l, n, Provenance::MANUAL)
    }

    pub fn with_provenance(m: f64, l: f64, n: usize, provenance: Provenance) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::invalid("M", m, "must be finite and > 0"));
        }
        if !(l >= m && l.is_finite()) {
            return Err(Error::invalid("L", l, "must be finite and >= M"));
        }
        if n == 0 {
            return Err(Error::invalid("N", 0.0, "must be >= 1"));
        }
        Ok(Self {
            m,
            l,
            n,
            provenance,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payoff {
    Put { strike: f64 },
    /// Priced as the put plus `S_0 - K e^{-rT}`.
    Call { strike: f64 },
    /// Pays 1 when the centralized log-return is at most `threshold`.
    DigitalBelow { threshold: f64 },
}

impl Payoff {
    fn validate(&self) -> Result<()> {
        match *self {
            Payoff::Put { strike } | Payoff::Call { strike } if !(strike > 0.0 && strike.is_finite()) => {
                Err(Error::invalid("K", strike, "must be finite and > 0"))
            }
            Payoff::DigitalBelow { threshold } if threshold.is_nan() => {
                Err(Error::invalid("d", threshold, "must not be NaN"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    pub price: f64,
    pub params: CosParameters,
    /// The accuracy certified by the tuning step, if any.
    pub tolerance: Option<f64>,
    pub elapsed: Duration,
}

/// `c_k = (1/L) Re{phi(k pi / 2L) e^{i k pi / 2}}` for `k = 0..=n`.
pub fn cos_coefficients(cf: &CentralizedCF, l: f64, n: usize) -> Vec<f64> {
    let step = PI / (2.0 * l);
    let inv_l = 1.0 / l;
    let mut out = Vec::with_capacity(n + 1);
    out.push(inv_l);
    for k in 1..=n {
        let phi = cf.eval(k as f64 * step);
        let rotated = match k % 4 {
            0 => phi.re,
            1 => -phi.im,
            2 => -phi.re,
            _ => phi.im,
        };
        out.push(rotated * inv_l);
    }
    out
}

/// `int_a^b cos(w (x + L)) dx`.
pub fn psi(k: usize, a: f64, b: f64, l: f64) -> f64 {
    if k == 0 {
        return b - a;
    }
    let w = k as f64 * PI / (2.0 * l);
    ((w * (b + l)).sin() - (w * (a + l)).sin()) / w
}

/// `int_a^b e^x cos(w (x + L)) dx`.
pub fn chi(k: usize, a: f64, b: f64, l: f64) -> f64 {
    let w = k as f64 * PI / (2.0 * l);
    let primitive = |x: f64| {
        let t = w * (x + l);
        x.exp() * (t.cos() + w * t.sin())
    };
    (primitive(b) - primitive(a)) / (1.0 + w * w)
}

/// `v_k = int_{-M}^{M} v(x) cos(k pi (x+L)/(2L)) dx` for `k = 0..=n`, with the
/// payoff written as a function of the centralized log-return (so that
/// `S_T = e^{mu + x}`) and discounted.
pub fn payoff_coefficients(
    payoff: &Payoff,
    ctx: &MarketContext,
    mu: f64,
    m: f64,
    l: f64,
    n: usize,
) -> Result<Vec<f64>> {
    payoff.validate()?;
    let discount = ctx.discount();
    let threshold = match *payoff {
        Payoff::Put { strike } | Payoff::Call { strike } => strike.ln() - mu,
        Payoff::DigitalBelow { threshold } => threshold,
    };
    if threshold <= -m {
        return Err(Error::DegeneratePayoff { threshold, lower: -m });
    }
    let d = threshold.min(m);
    Ok(match *payoff {
        Payoff::Put { strike } | Payoff::Call { strike } => {
            let forward_factor = mu.exp();
            (0..=n)
                .map(|k| discount * (strike * psi(k, -m, d, l) - forward_factor * chi(k, -m, d, l)))
                .collect()
        }
        Payoff::DigitalBelow { .. } => (0..=n).map(|k| discount * psi(k, -m, d, l)).collect(),
    })
}

/// `sum'_{k} c_k v_k` (first term halved), accumulated from the highest
/// index down with compensation.
pub fn cos_sum(c: &[f64], v: &[f64]) -> f64 {
    let n = c.len().min(v.len());
    if n == 0 {
        return 0.0;
    }
    let mut s = CompensatedSum::new();
    for k in (1..n).rev() {
        s.add(c[k] * v[k]);
    }
    s.add(0.5 * c[0] * v[0]);
    s.value()
}

pub fn cos_price(cf: &CentralizedCF, payoff: &Payoff, ctx: &MarketContext, params: &CosParameters) -> Result<PricingResult> {
    let start = Instant::now();
    let v = payoff_coefficients(payoff, ctx, cf.mu(), params.m, params.l, params.n)?;
    let c = cos_coefficients(cf, params.l, params.n);
    let mut price = cos_sum(&c, &v);
    if let Payoff::Call { strike } = *payoff {
        price += ctx.spot - strike * ctx.discount();
    }
    Ok(PricingResult {
        price,
        params: *params,
        tolerance: None,
        elapsed: start.elapsed(),
    })
}
