//! A-priori choice of `(M, L, N)` for a requested pricing accuracy.

use std::f64::consts::PI;

use crate::bounds::{bl_bound_semiheavy, hj_closed_form, hj_numeric, DerivativeBound};
use crate::cos::{cos_price, CosParameters, Payoff, PricingResult, Provenance, Source};
use crate::error::{Error, Result};
use crate::models::{central_moment, centralized_cf, tail_profile, HeavyTail, MarketContext, ModelSpec, SemiHeavyTail, TailProfile};

/// Largest derivative order scanned by [`minimize_j`].
pub const MAX_ORDER: u32 = 120;

/// Where `H_{j+1}` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HSource {
    /// Closed form when the model has one, numeric integral otherwise.
    Auto,
    ClosedForm,
    Numeric,
    /// A caller-supplied bound; its order must be `j + 1`.
    Supplied(DerivativeBound),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningRequest {
    pub model: ModelSpec,
    pub ctx: MarketContext,
    /// Bound on the payoff; the strike for puts.
    pub bound: f64,
    pub eps: f64,
    /// Moment order used for the truncation range (even).
    pub moments: u32,
    /// Derivative order `j`; `0` selects the bound for densities that are
    /// only once differentiable.
    pub order: u32,
    pub h_source: HSource,
}

impl TuningRequest {
    pub fn new(model: ModelSpec, ctx: MarketContext, bound: f64, eps: f64) -> Result<Self> {
        model.validate()?;
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::invalid("K", bound, "must be finite and > 0"));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps", eps, "must be finite and > 0"));
        }
        Ok(Self {
            model,
            ctx,
            bound,
            eps,
            moments: 8,
            order: 40,
            h_source: HSource::Auto,
        })
    }

    pub fn with_moments(mut self, n: u32) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::invalid("n", f64::from(n), "must be even and >= 2"));
        }
        self.moments = n;
        Ok(self)
    }

    pub fn with_order(mut self, j: u32) -> Self {
        self.order = j;
        self
    }

    pub fn with_h_source(mut self, h: HSource) -> Self {
        self.h_source = h;
        self
    }
}

/// Tuned parameters with the intermediate quantities that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuned {
    pub params: CosParameters,
    /// `sqrt(2M) K`.
    pub xi: f64,
    /// The `H_{j+1}` used.
    pub h: DerivativeBound,
    /// The real-valued bound on `N` before rounding up (may exceed `usize`).
    pub n_bound: f64,
    pub eps: f64,
}

fn derivative_bound(req: &TuningRequest, order: u32) -> Result<DerivativeBound> {
    let numeric = || {
        let cf = centralized_cf(&req.model, &req.ctx)?;
        hj_numeric(&cf, order)
    };
    match req.h_source {
        HSource::Supplied(h) if h.order == order => Ok(h),
        HSource::Supplied(h) => Err(Error::invalid("H", f64::from(h.order), "supplied bound has the wrong order")),
        HSource::ClosedForm => hj_closed_form(&req.model, &req.ctx, order),
        HSource::Numeric => numeric(),
        HSource::Auto => match hj_closed_form(&req.model, &req.ctx, order) {
            Err(Error::NoClosedForm { .. }) => numeric(),
            other => other,
        },
    }
}

/// `ln` of the series-length bound for order `j >= 1`:
/// `(2^{j+2} H_{j+1} L^{j+1} 12 xi / (j pi^{j+1} eps))^{1/j}`.
fn ln_series_length(h: &DerivativeBound, l: f64, xi: f64, eps: f64, j: u32) -> f64 {
    let jf = f64::from(j);
    ((jf + 2.0) * 2f64.ln() + h.ln_value + (jf + 1.0) * l.ln() + (12.0 * xi).ln()
        - jf.ln()
        - (jf + 1.0) * PI.ln()
        - eps.ln())
        / jf
}

/// Number of terms for order `j` (`j = 0` uses the once-differentiable bound).
fn series_length(h: &DerivativeBound, l: f64, xi: f64, eps: f64, j: u32) -> (f64, Source) {
    let floor = 4.0 * l / PI;
    let bound = if j == 0 {
        (4.0 * h.value * l / PI * 6.0 * xi / eps).powi(2)
    } else {
        ln_series_length(h, l, xi, eps, j).exp()
    };
    if bound >= floor {
        (bound, Source::SeriesTruncation { order: j, h: h.source })
    } else {
        (floor, Source::LowerClamp)
    }
}

fn to_terms(n: f64) -> Result<usize> {
    // beyond 2^53 the ceiling is no longer exact
    if !(n.is_finite() && n < 2f64.powi(53)) {
        return Err(Error::SeriesTooLong { value: n });
    }
    Ok((n.ceil() as usize).max(1))
}

fn require(condition: &'static str, required: f64, actual: f64) -> Result<()> {
    if actual >= required {
        Ok(())
    } else {
        Err(Error::ToleranceTooLoose {
            condition,
            required,
            actual,
        })
    }
}

/// Check the derivative order against the model's smoothness.
fn admissible_order(req: &TuningRequest) -> Result<()> {
    let available = req.model.smoothness(req.ctx.maturity);
    match available {
        Some(j) if j >= req.order => Ok(()),
        _ => Err(Error::NoSmoothness {
            required: req.order,
            available,
        }),
    }
}

/// Parameters for exponentially decaying tails.
pub fn tune_semiheavy(req: &TuningRequest, tail: &SemiHeavyTail) -> Result<Tuned> {
    admissible_order(req)?;
    let moment = central_moment(&req.model, &req.ctx, req.moments)?;
    let n = f64::from(req.moments);
    let m = (2.0 * req.bound * moment / req.eps).powf(1.0 / n);
    let l = m;
    let xi = (2.0 * m).sqrt() * req.bound;
    let (c1, c2, eps) = (tail.c1, tail.c2, req.eps);
    let target = eps / (6.0 * xi);

    require("L >= L0", tail.onset, l)?;
    require("L1", -((c2.sqrt() / c1) * target).ln() / c2, l)?;
    let b_factor = bl_bound_semiheavy(c1, c2, 0.0, m);
    require("LB", -(target / b_factor).ln() / c2, l)?;
    require("LN", -(PI / (4.0 * c1) * eps / (12.0 * xi)).ln() / c2, l)?;

    let h = derivative_bound(req, req.order + 1)?;
    let (n_bound, n_source) = series_length(&h, l, xi, eps, req.order);
    let params = CosParameters::with_provenance(
        m,
        l,
        to_terms(n_bound)?,
        Provenance {
            m: Source::MomentBound { moments: req.moments },
            l: Source::SameAsM,
            n: n_source,
        },
    )?;
    Ok(Tuned {
        params,
        xi,
        h,
        n_bound,
        eps,
    })
}

/// Parameters for Pareto tails.
pub fn tune_heavy(req: &TuningRequest, tail: &HeavyTail) -> Result<Tuned> {
    admissible_order(req)?;
    let (c3, alpha, eps, k) = (tail.c3, tail.alpha, req.eps, req.bound);
    let m = (4.0 * c3 * k / (eps * alpha)).powf(1.0 / alpha);
    let xi = (2.0 * m).sqrt() * k;
    let aliasing = (12.0 * c3 * (1.0 / (alpha * alpha) + 2.0 / 3.0).sqrt() * xi / eps).powf(2.0 / (1.0 + 2.0 * alpha));
    let (l, l_source) = if aliasing > m {
        (aliasing, Source::AliasingBound)
    } else {
        (m, Source::SameAsM)
    };
    require("M >= L0", tail.onset, m)?;

    let h = derivative_bound(req, req.order + 1)?;
    let (n_bound, n_source) = series_length(&h, l, xi, eps, req.order);
    let params = CosParameters::with_provenance(
        m,
        l,
        to_terms(n_bound)?,
        Provenance {
            m: Source::TailMass,
            l: l_source,
            n: n_source,
        },
    )?;
    Ok(Tuned {
        params,
        xi,
        h,
        n_bound,
        eps,
    })
}

/// Dispatch on the model's tail profile.
pub fn tune(req: &TuningRequest) -> Result<Tuned> {
    match tail_profile(&req.model, &req.ctx)? {
        TailProfile::SemiHeavy(t) => tune_semiheavy(req, &t),
        TailProfile::Heavy(t) => tune_heavy(req, &t),
    }
}

/// Scan `j = 1..=min(MAX_ORDER, J)` and return the order with the fewest
/// terms (smallest `j` on ties).
pub fn minimize_j(req: &TuningRequest) -> Result<(u32, usize)> {
    let available = req.model.smoothness(req.ctx.maturity).unwrap_or(0);
    let top = MAX_ORDER.min(available);
    if top == 0 {
        return Err(Error::NoSmoothness {
            required: 1,
            available: req.model.smoothness(req.ctx.maturity),
        });
    }
    let tail = tail_profile(&req.model, &req.ctx)?;
    let mut best: Option<(u32, usize)> = None;
    for j in 1..=top {
        let r = req.with_order(j).with_h_source(match req.h_source {
            HSource::Supplied(_) => HSource::Auto,
            s => s,
        });
        let tuned = match tail {
            TailProfile::SemiHeavy(t) => tune_semiheavy(&r, &t)?,
            TailProfile::Heavy(t) => tune_heavy(&r, &t)?,
        };
        let n = tuned.params.n;
        if best.is_none_or(|(_, b)| n < b) {
            best = Some((j, n));
        }
    }
    Ok(best.expect("at least one order scanned"))
}

/// Tune and price in one step; the result carries the certified tolerance.
pub fn price_tuned(req: &TuningRequest, payoff: &Payoff) -> Result<(Tuned, PricingResult)> {
    let tuned = tune(req)?;
    let cf = centralized_cf(&req.model, &req.ctx)?;
    let mut result = cos_price(&cf, payoff, &req.ctx, &tuned.params)?;
    result.tolerance = Some(req.eps);
    Ok((tuned, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundSource;

    fn bs_request(j: u32) -> TuningRequest {
        let ctx = MarketContext::new(100.0, 0.0, 1.0).unwrap();
        TuningRequest::new(ModelSpec::black_scholes(0.2).unwrap(), ctx, 100.0, 1e-8)
            .unwrap()
            .with_order(j)
    }

    fn fmls(j: u32) -> TuningRequest {
        let ctx = MarketContext::new(100.0, 0.0, 1.0).unwrap();
        TuningRequest::new(ModelSpec::fmls(1.5597, 0.1486).unwrap(), ctx, 100.0, 1e-2)
            .unwrap()
            .with_order(j)
    }

    #[test]
    fn bs_series_lengths() {
        let expected = [897, 271, 200, 179, 172, 170, 171];
        for (j, n) in (10..=70).step_by(10).zip(expected) {
            let t = tune(&bs_request(j)).unwrap();
            assert_eq!(t.params.n, n, "j={j}");
        }
    }

    #[test]
    fn bs_range_from_eighth_moment() {
        let t = tune(&bs_request(40)).unwrap();
        let moment8 = 105.0 * 0.2f64.powi(8);
        let l = (2.0 * 100.0 * moment8 / 1e-8).powf(0.125);
        assert!((t.params.l - l).abs() < 1e-12);
        assert_eq!(t.params.m, t.params.l);
        assert_eq!(t.params.provenance.m, Source::MomentBound { moments: 8 });
    }

    #[test]
    fn numeric_h_gives_same_bs_terms() {
        for j in (10..=70).step_by(10) {
            let closed = tune(&bs_request(j)).unwrap().params.n;
            let numeric = tune(&bs_request(j).with_h_source(HSource::Numeric)).unwrap();
            assert_eq!(numeric.h.source, BoundSource::NumericIntegral);
            assert_eq!(numeric.params.n, closed, "j={j}");
        }
    }

    #[test]
    fn fmls_parameters() {
        let t = tune(&fmls(40)).unwrap();
        assert!((t.params.m - 69.0).abs() < 1.0, "{}", t.params.m);
        assert!((t.params.l - 176.0).abs() < 2.0, "{}", t.params.l);
        assert_eq!(t.params.n, 5451);
        assert_eq!(t.params.provenance.l, Source::AliasingBound);
    }

    #[test]
    fn fmls_other_orders_do_not_help_much() {
        let n40 = tune(&fmls(40)).unwrap().params.n as f64;
        let best = (20..=80).map(|j| tune(&fmls(j)).unwrap().params.n).min().unwrap() as f64;
        assert!(best >= 0.75 * n40);
    }

    #[test]
    fn minimize_over_orders() {
        let (j, n) = minimize_j(&bs_request(40)).unwrap();
        assert!(n <= 170);
        let direct = tune(&bs_request(j)).unwrap().params.n;
        assert_eq!(direct, n);
        for k in 1..j {
            assert!(tune(&bs_request(k)).unwrap().params.n > n);
        }
    }

    #[test]
    fn smaller_tolerance_needs_more_terms() {
        let a = tune(&bs_request(40)).unwrap();
        let mut r = bs_request(40);
        r.eps /= 2.0;
        let b = tune(&r).unwrap();
        assert!(b.params.n >= a.params.n);
        assert!(b.params.l > a.params.l);
    }

    #[test]
    fn lower_clamp_holds() {
        for j in [1, 5, 40, 120] {
            let t = tune(&bs_request(j)).unwrap();
            assert!(t.params.n as f64 >= 4.0 * t.params.l / PI);
        }
        let loose = TuningRequest::new(
            ModelSpec::black_scholes(0.2).unwrap(),
            MarketContext::new(100.0, 0.0, 1.0).unwrap(),
            100.0,
            1e-3,
        )
        .unwrap()
        .with_order(120);
        if let Ok(t) = tune(&loose) {
            assert!(t.params.n as f64 >= 4.0 * t.params.l / PI);
        }
    }

    #[test]
    fn vg_requires_smoothness() {
        let ctx = MarketContext::new(100.0, 0.0, 0.25).unwrap();
        let vg = ModelSpec::variance_gamma(0.1, 0.2, 0.0).unwrap();
        let req = TuningRequest::new(vg, ctx, 100.0, 0.01).unwrap();
        assert_eq!(
            tune(&req),
            Err(Error::NoSmoothness {
                required: 40,
                available: Some(0)
            })
        );
        let short = MarketContext::new(100.0, 0.0, 0.05).unwrap();
        let r = TuningRequest::new(vg, short, 100.0, 0.01).unwrap().with_order(0);
        assert!(matches!(tune(&r), Err(Error::NoSmoothness { available: None, .. })));
    }

    #[test]
    fn vg_once_differentiable_path() {
        let ctx = MarketContext::new(100.0, 0.0, 0.25).unwrap();
        let vg = ModelSpec::variance_gamma(0.1, 0.2, 0.0).unwrap();
        let h1 = DerivativeBound {
            order: 1,
            value: 218.0,
            ln_value: 218f64.ln(),
            source: BoundSource::SupByInversion,
        };
        let req = TuningRequest::new(vg, ctx, 100.0, 0.01)
            .unwrap()
            .with_moments(4)
            .unwrap()
            .with_order(0)
            .with_h_source(HSource::Supplied(h1));
        let t = tune(&req).unwrap();
        let xi = (2.0 * t.params.m).sqrt() * 100.0;
        let expected = (4.0 * 218.0 * t.params.l / PI * 6.0 * xi / 0.01).powi(2);
        assert!((t.n_bound - expected).abs() < 1e-6 * expected);
        assert!((t.params.l - 0.91).abs() < 0.005);
        assert!(t.n_bound > 1e12);
    }

    #[test]
    fn cauchy_digital_range() {
        let ctx = MarketContext::new(1.0, 0.0, 1.0).unwrap();
        let req = TuningRequest::new(ModelSpec::Cauchy, ctx, 1.0, 1e-3).unwrap();
        let t = tune(&req).unwrap();
        assert!((t.params.m - 4.0 / (PI * 1e-3)).abs() < 1e-9);
        // mass beyond M stays within the budget 2 K C3 M^{-alpha} / alpha = eps / 2
        let mass = 2.0 * (1.0 - crate::reference::cauchy_cdf(t.params.m));
        assert!(mass <= 2.0 / PI / t.params.m);
        assert!(mass <= 1e-3 / 2.0);
    }

    #[test]
    fn heavy_range_is_continuous_in_alpha() {
        let ctx = MarketContext::new(100.0, 0.0, 1.0).unwrap();
        let m_at = |a: f64| {
            let req = TuningRequest::new(ModelSpec::fmls(a, 0.15).unwrap(), ctx, 100.0, 1e-2).unwrap();
            tune(&req).unwrap().params.m
        };
        let mut a = 1.2;
        while a < 1.95 {
            let (x, y) = (m_at(a), m_at(a + 1e-6));
            assert!((x - y).abs() < 1e-3 * x, "alpha={a}");
            a += 0.05;
        }
    }
}
