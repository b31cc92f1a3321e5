//! The numerical studies: series lengths for Black–Scholes, the variance
//! gamma counterexample, the FMLS study and convergence sweeps.

use std::time::Instant;

use cos_core::bounds::{hj_numeric, hj_sup_by_inversion, DerivativeBound};
use cos_core::cos::{cos_price, CosParameters, Payoff};
use cos_core::reference::{black_scholes_put, carr_madan_call, cauchy_cdf, CarrMadanConfig};
use cos_core::tuning::{tune, HSource, Tuned, TuningRequest};
use cos_core::{centralized_cf, CentralizedCF, MarketContext, ModelSpec};

use crate::table::{Cell, Table};
use crate::timing::Timing;
use crate::{HarnessError, Result};

/// Default upper limit of the `N_min` search.
pub const N_CAP: usize = 1 << 24;
/// Records below this error are treated as noise in slope fits.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Records with fewer terms are treated as pre-asymptotic in slope fits.
pub const FIT_MIN_N: usize = 64;
/// Independently known FMLS call price; a cross-check, not ground truth.
pub const FMLS_CROSS_CHECK: f64 = 9.743370825229;

pub const IDS: [&str; 7] = [
    "table1",
    "vg_counterexample",
    "fmls_study",
    "convergence_bs",
    "convergence_cauchy",
    "convergence_fmls",
    "l_optimal",
];

/// Smallest `N` with `error_at(N) <= eps` found by doubling from 1 and then
/// bisecting. Every probed `N' > N` also met the tolerance, but unprobed
/// values may not when the error is not monotone in `N`.
pub fn find_nmin<F>(mut error_at: F, eps: f64, cap: usize) -> Result<usize>
where
    F: FnMut(usize) -> Result<f64>,
{
    let ok = |e: f64| e <= eps;
    let mut hi = 1;
    loop {
        if ok(error_at(hi)?) {
            break;
        }
        if hi >= cap {
            return Err(HarnessError::NotReachedWithinCap { eps, cap });
        }
        hi = (2 * hi).min(cap);
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(error_at(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A fixed pricing problem with a trusted reference value.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: &'static str,
    pub cf: CentralizedCF,
    pub ctx: MarketContext,
    pub payoff: Payoff,
    pub reference: f64,
}

impl Problem {
    pub fn price(&self, m: f64, l: f64, n: usize) -> Result<f64> {
        let params = CosParameters::new(m, l, n)?;
        Ok(cos_price(&self.cf, &self.payoff, &self.ctx, &params)?.price)
    }

    pub fn error(&self, m: f64, l: f64, n: usize) -> Result<f64> {
        Ok((self.price(m, l, n)? - self.reference).abs())
    }

    /// Black–Scholes put, `S_0 = K = 100`, `r = 0`, `T = 1`.
    pub fn bs_put(sigma: f64) -> Result<Self> {
        let ctx = MarketContext::new(100.0, 0.0, 1.0)?;
        let cf = centralized_cf(&ModelSpec::black_scholes(sigma)?, &ctx)?;
        Ok(Self {
            name: "bs_put",
            cf,
            ctx,
            payoff: Payoff::Put { strike: 100.0 },
            reference: black_scholes_put(&ctx, sigma, 100.0),
        })
    }

    /// `P(X <= 1.23)` for a standard Cauchy `X`.
    pub fn cauchy_digital() -> Result<Self> {
        let ctx = MarketContext::new(1.0, 0.0, 1.0)?;
        let cf = centralized_cf(&ModelSpec::Cauchy, &ctx)?;
        let threshold = 1.23;
        Ok(Self {
            name: "cauchy_digital",
            cf,
            ctx,
            payoff: Payoff::DigitalBelow { threshold },
            reference: cauchy_cdf(threshold),
        })
    }

    /// FMLS call, `alpha = 1.5597`, `sigma = 0.1486`, `S_0 = K = 100`.
    pub fn fmls_call() -> Result<Self> {
        let ctx = MarketContext::new(100.0, 0.0, 1.0)?;
        let cf = centralized_cf(&fmls_model()?, &ctx)?;
        let reference = carr_madan_call(&cf, &ctx, 100.0, &CarrMadanConfig::REFERENCE)?;
        Ok(Self {
            name: "fmls_call",
            cf,
            ctx,
            payoff: Payoff::Call { strike: 100.0 },
            reference,
        })
    }
}

fn fmls_model() -> Result<ModelSpec> {
    Ok(ModelSpec::fmls(1.5597, 0.1486)?)
}

fn cos_timing(problem: &Problem, timing: &Timing, m: f64, l: f64, n: usize) -> Result<f64> {
    let params = CosParameters::new(m, l, n)?;
    cos_price(&problem.cf, &problem.payoff, &problem.ctx, &params)?;
    Ok(timing.median_ms(|| cos_price(&problem.cf, &problem.payoff, &problem.ctx, &params)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub j: u32,
    pub n: usize,
    pub cpu_cos_ms: f64,
    pub cpu_hj_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub l: f64,
    pub n_min: usize,
    pub cpu_cos_nmin_ms: f64,
}

/// Black–Scholes put with `sigma = 0.2`, `eps = 1e-8`, eight moments and
/// `j = 10, 20, ..., 70`.
pub fn run_table1(timing: &Timing) -> Result<Table1> {
    let problem = Problem::bs_put(0.2)?;
    let eps = 1e-8;
    let base = TuningRequest::new(ModelSpec::black_scholes(0.2)?, problem.ctx, 100.0, eps)?;
    let mut rows = Vec::new();
    let mut l = 0.0;
    for j in (10..=70).step_by(10) {
        let tuned = tune(&base.with_order(j))?;
        l = tuned.params.l;
        let cpu_cos_ms = cos_timing(&problem, timing, tuned.params.m, l, tuned.params.n)?;
        let cpu_hj_ms = timing.median_ms(|| hj_numeric(&problem.cf, j + 1));
        rows.push(Table1Row {
            j,
            n: tuned.params.n,
            cpu_cos_ms,
            cpu_hj_ms,
        });
    }
    let n_min = find_nmin(|n| problem.error(l, l, n), eps, N_CAP)?;
    let cpu_cos_nmin_ms = cos_timing(&problem, timing, l, l, n_min)?;
    Ok(Table1 {
        rows,
        l,
        n_min,
        cpu_cos_nmin_ms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VgStudy {
    pub reference: f64,
    /// `(1/pi) int u |phi(u)| du`.
    pub h1_integral: DerivativeBound,
    /// `max |f'|` by inversion.
    pub h1_sup: DerivativeBound,
    pub l: f64,
    pub n_from_integral: f64,
    pub n_from_sup: f64,
    /// COS with `N = 50`, `L = M = 0.91`.
    pub cos_price: f64,
}

/// Variance gamma with `sigma = 0.1`, `nu = 0.2`, `theta = 0`, `T = 0.25`:
/// the density is only once differentiable, so the `j = 0` bound applies.
pub fn run_vg_counterexample() -> Result<VgStudy> {
    let ctx = MarketContext::new(100.0, 0.0, 0.25)?;
    let model = ModelSpec::variance_gamma(0.1, 0.2, 0.0)?;
    let cf = centralized_cf(&model, &ctx)?;
    let reference = carr_madan_call(&cf, &ctx, 100.0, &CarrMadanConfig::REFERENCE)?;
    let h1_integral = hj_numeric(&cf, 1)?;
    let h1_sup = hj_sup_by_inversion(&cf, 1, 0.3, 121)?;
    let req = TuningRequest::new(model, ctx, 100.0, 0.01)?.with_moments(4)?.with_order(0);
    let with = |h: DerivativeBound| -> Result<Tuned> { Ok(tune(&req.with_h_source(HSource::Supplied(h)))?) };
    let from_integral = with(h1_integral)?;
    let from_sup = with(h1_sup)?;
    let params = CosParameters::new(0.91, 0.91, 50)?;
    let price = cos_price(&cf, &Payoff::Call { strike: 100.0 }, &ctx, &params)?.price;
    Ok(VgStudy {
        reference,
        h1_integral,
        h1_sup,
        l: from_sup.params.l,
        n_from_integral: from_integral.n_bound,
        n_from_sup: from_sup.n_bound,
        cos_price: price,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmlsStudy {
    pub tuned: Tuned,
    pub reference: f64,
    pub price: f64,
    pub n_min: usize,
    pub cpu_tuned_ms: f64,
    pub cpu_nmin_ms: f64,
    /// `(j, N)` with the fewest terms for `j` in `20..=80`.
    pub best_order: (u32, usize),
}

/// FMLS call at `eps = 1e-2`, `j = 40`.
pub fn run_fmls_study(timing: &Timing) -> Result<FmlsStudy> {
    let problem = Problem::fmls_call()?;
    let eps = 1e-2;
    let req = TuningRequest::new(fmls_model()?, problem.ctx, 100.0, eps)?.with_order(40);
    let tuned = tune(&req)?;
    let CosParameters { m, l, n, .. } = tuned.params;
    let price = problem.price(m, l, n)?;
    let n_min = find_nmin(|k| problem.error(m, l, k), eps, N_CAP)?;
    let cpu_tuned_ms = cos_timing(&problem, timing, m, l, n)?;
    let cpu_nmin_ms = cos_timing(&problem, timing, m, l, n_min)?;
    let mut best_order = (40, n);
    for j in 20..=80 {
        let nj = tune(&req.with_order(j))?.params.n;
        if nj < best_order.1 {
            best_order = (j, nj);
        }
    }
    Ok(FmlsStudy {
        tuned,
        reference: problem.reference,
        price,
        n_min,
        cpu_tuned_ms,
        cpu_nmin_ms,
        best_order,
    })
}

/// How the truncation range grows with `N` (`M = L` throughout).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LStrategy {
    Constant(f64),
    /// `L = gamma N`.
    Linear(f64),
    /// `L = gamma sqrt(N)`.
    Sqrt(f64),
    /// The best `L` on the grid `exp(0.07 i)`, `i = 0..=200`.
    OptimalGrid,
}

impl LStrategy {
    pub fn label(&self) -> String {
        match *self {
            LStrategy::Constant(c) => format!("L={c}"),
            LStrategy::Linear(g) => format!("L={g}*N"),
            LStrategy::Sqrt(g) => format!("L={g}*sqrt(N)"),
            LStrategy::OptimalGrid => "L=optimal".to_string(),
        }
    }
}

pub fn l_grid() -> Vec<f64> {
    (0..=200).map(|i| (0.07 * f64::from(i)).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub l: f64,
    pub error: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub strategy: LStrategy,
    pub records: Vec<ConvergenceRecord>,
    /// Fitted order of `error` against `N` (log-log), if enough points.
    pub slope: Option<f64>,
    /// Log-log slope of `L` against `N` for the optimal-grid strategy.
    pub l_slope: Option<f64>,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `log2 error` against `log2 N` over the records above the noise
/// floor with at least [`FIT_MIN_N`] terms.
pub fn error_slope(records: &[ConvergenceRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.error >= NOISE_FLOOR && r.n >= FIT_MIN_N)
        .map(|r| ((r.n as f64).log2(), r.error.log2()))
        .collect();
    fit_slope(&pts)
}

/// Slope of `log2 L` against `log2 N`.
pub fn l_slope(records: &[ConvergenceRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| ((r.n as f64).log2(), r.l.log2())).collect();
    fit_slope(&pts)
}

/// First `N` from which doubling no longer halves the error; the sweep is
/// taken to have reached its plateau there.
pub fn plateau_onset(records: &[ConvergenceRecord]) -> Option<usize> {
    records
        .windows(2)
        .find(|w| w[1].error >= 0.5 * w[0].error)
        .map(|w| w[0].n)
}

fn best_on_grid(problem: &Problem, n: usize, grid: &[f64]) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &l in grid {
        let e = match problem.error(l, l, n) {
            Ok(e) => e,
            Err(HarnessError::Pricing(cos_core::Error::DegeneratePayoff { .. })) => continue,
            Err(e) => return Err(e),
        };
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((l, e));
        }
    }
    best.ok_or(HarnessError::ReferenceUnavailable("no admissible L on the grid"))
}

/// Errors for `N = 2^4, ..., 2^max_log2`. Points where the range is too
/// short for the payoff to be non-trivial are skipped.
pub fn run_convergence(problem: &Problem, strategy: LStrategy, max_log2: u32) -> Result<Convergence> {
    if !problem.reference.is_finite() {
        return Err(HarnessError::ReferenceUnavailable(problem.name));
    }
    let grid = l_grid();
    let mut records = Vec::new();
    for p in 4..=max_log2 {
        let n = 1usize << p;
        let start = Instant::now();
        let (l, error) = match strategy {
            LStrategy::OptimalGrid => best_on_grid(problem, n, &grid)?,
            s => {
                let l = match s {
                    LStrategy::Constant(c) => c,
                    LStrategy::Linear(g) => g * n as f64,
                    LStrategy::Sqrt(g) => g * (n as f64).sqrt(),
                    LStrategy::OptimalGrid => unreachable!(),
                };
                match problem.error(l, l, n) {
                    Ok(e) => (l, e),
                    Err(HarnessError::Pricing(cos_core::Error::DegeneratePayoff { .. })) => continue,
                    Err(e) => return Err(e),
                }
            }
        };
        records.push(ConvergenceRecord {
            n,
            l,
            error,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let slope = error_slope(&records);
    let l_slope = matches!(strategy, LStrategy::OptimalGrid).then(|| l_slope(&records)).flatten();
    Ok(Convergence {
        strategy,
        records,
        slope,
        l_slope,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), crate::table::format_float)
}

fn convergence_table(problem: &Problem, runs: &[Convergence]) -> Table {
    let mut t = Table::new(&["strategy", "N", "L", "error", "wall_ms"]);
    t.meta(format!("problem = {}", problem.name))
        .meta(format!("reference = {}", crate::table::format_float(problem.reference)))
        .meta(format!(
            "fit window: error >= {NOISE_FLOOR:e} and N >= {FIT_MIN_N}; slope of log2(error) on log2(N)"
        ))
        .mark_nondeterministic("wall_ms");
    for run in runs {
        t.meta(format!("slope[{}] = {}", run.strategy.label(), opt(run.slope)));
        if run.l_slope.is_some() {
            t.meta(format!("l_slope[{}] = {}", run.strategy.label(), opt(run.l_slope)));
        }
        for r in &run.records {
            t.push(vec![
                Cell::Text(run.strategy.label()),
                r.n.into(),
                r.l.into(),
                r.error.into(),
                r.wall_ms.into(),
            ]);
        }
    }
    t
}

/// Run experiment `id` and lay the result out as a table. `max_log2` caps
/// the sweep length of the convergence studies.
pub fn experiment_table(id: &str, max_log2: u32, timing: &Timing) -> Result<Table> {
    if !(4..=24).contains(&max_log2) {
        return Err(HarnessError::Usage(format!("max-log2 must lie in 4..=24, got {max_log2}")));
    }
    let mut t = match id {
        "table1" => {
            let r = run_table1(timing)?;
            let mut t = Table::new(&["j", "N", "cpu_cos_ms", "cpu_hj_ms"]);
            t.meta("model = bs, sigma = 0.2, T = 1, r = 0, S0 = K = 100, eps = 1e-8, n = 8")
                .meta(format!("L = M = {}", crate::table::format_float(r.l)))
                .meta(format!("N_min = {} (last row)", r.n_min))
                .mark_nondeterministic("cpu_cos_ms")
                .mark_nondeterministic("cpu_hj_ms");
            for row in &r.rows {
                t.push(vec![row.j.into(), row.n.into(), row.cpu_cos_ms.into(), row.cpu_hj_ms.into()]);
            }
            t.push(vec!["min".into(), r.n_min.into(), r.cpu_cos_nmin_ms.into(), "".into()]);
            t
        }
        "vg_counterexample" => {
            let r = run_vg_counterexample()?;
            let mut t = Table::new(&["quantity", "value"]);
            t.meta("model = vg, sigma = 0.1, nu = 0.2, theta = 0, T = 0.25, S0 = K = 100, eps = 1e-2, n = 4, j = 0");
            let rows: [(&str, f64); 8] = [
                ("reference_carr_madan", r.reference),
                ("h1_integral", r.h1_integral.value),
                ("h1_sup", r.h1_sup.value),
                ("L", r.l),
                ("N_bound_h1_integral", r.n_from_integral),
                ("N_bound_h1_sup", r.n_from_sup),
                ("cos_price_N50_L0.91", r.cos_price),
                ("cos_error_N50_L0.91", (r.cos_price - r.reference).abs()),
            ];
            for (k, v) in rows {
                t.push(vec![k.into(), v.into()]);
            }
            t
        }
        "fmls_study" => {
            let r = run_fmls_study(timing)?;
            let mut t = Table::new(&["quantity", "value", "cpu_ms"]);
            t.meta("model = fmls, alpha = 1.5597, sigma = 0.1486, T = 1, r = 0, S0 = K = 100, eps = 1e-2, j = 40")
                .meta(format!("cross-check price = {FMLS_CROSS_CHECK}"))
                .mark_nondeterministic("cpu_ms");
            let p = r.tuned.params;
            let blank = || Cell::Text(String::new());
            let rows: [(&str, Cell, Cell); 9] = [
                ("M", p.m.into(), blank()),
                ("L", p.l.into(), blank()),
                ("N", p.n.into(), r.cpu_tuned_ms.into()),
                ("N_min", r.n_min.into(), r.cpu_nmin_ms.into()),
                ("reference_carr_madan", r.reference.into(), blank()),
                ("cos_price", r.price.into(), blank()),
                ("cos_error", (r.price - r.reference).abs().into(), blank()),
                ("best_j_20_80", r.best_order.0.into(), blank()),
                ("N_best_j", r.best_order.1.into(), blank()),
            ];
            for (k, v, c) in rows {
                t.push(vec![k.into(), v, c]);
            }
            t.push(vec!["time_ratio_tuned_over_nmin".into(), blank(), (r.cpu_tuned_ms / r.cpu_nmin_ms).into()]);
            t
        }
        "convergence_bs" => {
            let p = Problem::bs_put(0.2)?;
            let runs = [
                LStrategy::Constant(0.8),
                LStrategy::Constant(1.2),
                LStrategy::Sqrt(0.2),
                LStrategy::Linear(0.04),
            ]
            .into_iter()
            .map(|s| run_convergence(&p, s, max_log2))
            .collect::<Result<Vec<_>>>()?;
            convergence_table(&p, &runs)
        }
        "convergence_cauchy" => {
            let p = Problem::cauchy_digital()?;
            convergence_table(&p, &[run_convergence(&p, LStrategy::Linear(0.1), max_log2)?])
        }
        "convergence_fmls" => {
            let p = Problem::fmls_call()?;
            convergence_table(&p, &[run_convergence(&p, LStrategy::Linear(0.01), max_log2)?])
        }
        "l_optimal" => {
            let top = max_log2.min(14);
            let mut t = Table::new(&["problem", "N", "L_opt", "error"]);
            t.meta(format!("L grid: exp(0.07 i), i = 0..=200; N = 2^4..2^{top}"));
            for p in [Problem::cauchy_digital()?, Problem::fmls_call()?] {
                let run = run_convergence(&p, LStrategy::OptimalGrid, top)?;
                t.meta(format!("l_slope[{}] = {}", p.name, opt(run.l_slope)));
                for r in &run.records {
                    t.push(vec![p.name.into(), r.n.into(), r.l.into(), r.error.into()]);
                }
            }
            t
        }
        other => return Err(HarnessError::Usage(format!("unknown experiment `{other}`; expected one of {}", IDS.join(", ")))),
    };
    t.metadata.insert(0, format!("experiment = {id}"));
    Ok(t)
}
