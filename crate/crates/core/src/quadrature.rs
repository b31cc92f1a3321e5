//! Adaptive Gauss–Kronrod quadrature and an oscillatory-tail integrator.
//!
//! Everything numerical in the crate that is not a closed form goes through
//! here: the `H_j` integrals, Fourier inversion of densities and the test
//! oracles for the cosine coefficients.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_715_264_444_670,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Requested accuracy: the routine stops once the error estimate is below
/// `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-13, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Nodes of the 21-point Kronrod rule mapped to `[a, b]`, with weights.
/// Useful for building composite rules where the same samples feed many
/// integrals (e.g. all cosine coefficients at once).
pub fn kronrod_nodes(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..21).map(move |i| {
        let (x, w) = if i < 10 {
            (-XGK[i], WGK[i])
        } else if i == 10 {
            (0.0, WGK[10])
        } else {
            (XGK[20 - i], WGK[20 - i])
        };
        (centre + half * x, half * w)
    })
}

/// One Gauss–Kronrod panel with the QUADPACK error heuristic.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (value, err, _) = kronrod21(f, a, b);
    (value, err)
}

/// Value, error estimate and the rounding floor of that estimate.
fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_centre = f(centre);
    let mut res_k = WGK[10] * f_centre;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for i in 0..10 {
        let dx = half * XGK[i];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[i] = f1;
        fv2[i] = f2;
        res_k += WGK[i] * (f1 + f2);
        res_abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            res_g += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_centre - mean).abs();
    for i in 0..10 {
        res_asc += WGK[i] * ((fv1[i] - mean).abs() + (fv2[i] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (value, err, floor)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const DEFAULT_MAX_PANELS: usize = 4000;

/// Globally adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_with_limit(&mut f, a, b, tol, DEFAULT_MAX_PANELS)
}

pub fn integrate_with_limit<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error, floor) = kronrod21(f, a, b);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value,
        error,
        floor,
    });
    // error estimates cannot drop below the accumulated rounding floor
    let done = |value: f64, error: f64, floor: f64| value.is_finite() && error <= tol.target(value).max(2.0 * floor);
    let sums = |heap: &BinaryHeap<Panel>| {
        heap.iter()
            .fold((0.0, 0.0, 0.0), |(v, e, r), p| (v + p.value, e + p.error, r + p.floor))
    };
    let (mut total, mut total_err, mut total_floor) = (value, error, floor);
    while !done(total, total_err, total_floor) {
        if heap.len() % 64 == 0 || total_err < 4.0 * tol.target(total) {
            // incremental updates drift; re-sum before deciding
            (total, total_err, total_floor) = sums(&heap);
            if done(total, total_err, total_floor) {
                break;
            }
        }
        if heap.len() >= max_panels || !total.is_finite() {
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
            });
        }
        let (v1, e1, r1) = kronrod21(f, worst.a, mid);
        let (v2, e2, r2) = kronrod21(f, mid, worst.b);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_floor += r1 + r2 - worst.floor;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            floor: r1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            floor: r2,
        });
    }
    let (value, error, _) = sums(&heap);
    if !value.is_finite() {
        return Err(Error::QuadratureFailure {
            estimate: value,
            error,
        });
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Integral over `[a, inf)` through the map `x = a + (1 - t)/t`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<Estimate> {
    let mut g = |t: f64| {
        let x = a + (1.0 - t) / t;
        let v = f(x) / (t * t);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_with_limit(&mut g, 0.0, 1.0, tol, DEFAULT_MAX_PANELS)
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
pub fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n < 3 {
        return partial_sums.last().copied().unwrap_or(0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur = partial_sums.to_vec();
    let mut best = partial_sums[n - 1];
    for k in 1..n {
        let len = n - k;
        let mut next = Vec::with_capacity(len);
        for i in 0..len {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 || !d.is_finite() {
                return best;
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        if k % 2 == 0 {
            let candidate = next[len - 1];
            if candidate.is_finite() {
                best = candidate;
            }
        }
        prev = cur;
        cur = next;
    }
    best
}

/// Integral of an oscillating function over `[0, inf)`.
///
/// The range is cut into panels `[0, first]`, `[first, first + step]`, ...
/// which should sit at (approximate) zeros of the oscillating factor, so that
/// the panel contributions alternate in sign. Summation stops either when
/// `envelope(u) * step` falls below the tolerance or when Wynn-extrapolated
/// partial sums settle.
pub fn integrate_oscillatory<F, E>(
    mut f: F,
    first: f64,
    step: f64,
    envelope: E,
    tol: Tolerance,
    max_panels: usize,
) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
    E: Fn(f64) -> f64,
{
    const WINDOW: usize = 24;
    let panel_tol = Tolerance::new(tol.abs * 0.05, tol.rel * 0.05);
    let mut partial = Vec::with_capacity(WINDOW);
    let mut sum = 0.0;
    let mut evaluations = 0;
    let mut a = 0.0;
    let mut b = first;
    let mut last_extrapolated: Option<f64> = None;
    let mut agreements = 0;
    for _ in 0..max_panels {
        let est = integrate_with_limit(&mut f, a, b, panel_tol, 200)?;
        evaluations += est.evaluations;
        sum += est.value;
        if partial.len() == WINDOW {
            partial.remove(0);
        }
        partial.push(sum);

        let remainder = envelope(b) * step;
        if remainder < 0.1 * tol.target(sum) {
            return Ok(Estimate {
                value: sum,
                error: remainder,
                evaluations,
            });
        }
        if partial.len() >= 8 {
            let extrapolated = wynn_epsilon(&partial);
            if let Some(prev) = last_extrapolated {
                let diff = (extrapolated - prev).abs();
                if diff < 0.1 * tol.target(extrapolated) {
                    agreements += 1;
                    if agreements >= 3 {
                        return Ok(Estimate {
                            value: extrapolated,
                            error: diff,
                            evaluations,
                        });
                    }
                } else {
                    agreements = 0;
                }
            }
            last_extrapolated = Some(extrapolated);
        }
        a = b;
        b += step;
    }
    Err(Error::QuadratureFailure {
        estimate: last_extrapolated.unwrap_or(sum),
        error: f64::NAN,
    })
}
