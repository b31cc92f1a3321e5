use cos_harness::experiments::{
    error_slope, experiment_table, find_nmin, plateau_onset, run_convergence, ConvergenceRecord, LStrategy, Problem,
    FIT_MIN_N, NOISE_FLOOR,
};
use cos_harness::timing::Timing;

fn quick() -> Timing {
    Timing { reps: 3, warmup: 1 }
}

#[test]
fn csv_is_deterministic_apart_from_timings() {
    for id in ["table1", "vg_counterexample", "fmls_study", "convergence_cauchy", "l_optimal"] {
        let a = experiment_table(id, 10, &quick()).unwrap().deterministic_csv().unwrap();
        let b = experiment_table(id, 10, &quick()).unwrap().deterministic_csv().unwrap();
        assert_eq!(a, b, "{id}");
        assert!(a.starts_with("# version: cos-harness"));
        assert!(a.contains(&format!("# experiment = {id}")));
    }
    let t = experiment_table("convergence_fmls", 10, &quick()).unwrap();
    assert_eq!(t.nondeterministic, ["wall_ms"]);
    assert!(t.metadata.iter().any(|m| m.starts_with("fit window")));
}

fn fit_points(records: &[ConvergenceRecord]) -> Vec<ConvergenceRecord> {
    records
        .iter()
        .filter(|r| r.error >= NOISE_FLOOR && r.n >= FIT_MIN_N)
        .copied()
        .collect()
}

#[test]
fn slope_survives_dropping_the_first_point() {
    let cases = [
        (Problem::fmls_call().unwrap(), LStrategy::Linear(0.01)),
        (Problem::cauchy_digital().unwrap(), LStrategy::Linear(0.1)),
    ];
    for (p, s) in cases {
        let run = run_convergence(&p, s, 16).unwrap();
        let pts = fit_points(&run.records);
        let full = error_slope(&pts).unwrap();
        let trimmed = error_slope(&pts[1..]).unwrap();
        assert_eq!(run.slope, Some(full));
        assert!((full - trimmed).abs() < 0.05, "{}: {full} vs {trimmed}", p.name);
    }
}

#[test]
fn records_are_sorted_and_non_negative() {
    let p = Problem::bs_put(0.2).unwrap();
    for s in [LStrategy::Sqrt(0.2), LStrategy::Linear(0.04), LStrategy::OptimalGrid] {
        let run = run_convergence(&p, s, 12).unwrap();
        assert_eq!(run.records.len(), 9);
        assert!(run.records.windows(2).all(|w| w[0].n < w[1].n));
        assert!(run.records.iter().all(|r| r.error >= 0.0 && r.l > 0.0));
    }
}

#[test]
fn constant_range_plateaus() {
    let p = Problem::bs_put(0.2).unwrap();
    for c in [0.8, 1.2] {
        let run = run_convergence(&p, LStrategy::Constant(c), 20).unwrap();
        let n_star = plateau_onset(&run.records).unwrap();
        let at = |n: usize| run.records.iter().find(|r| r.n == n).unwrap().error;
        assert!(at(1 << 20) >= 0.5 * at(n_star), "L={c}");
    }
    let narrow = run_convergence(&p, LStrategy::Constant(0.8), 14).unwrap();
    let wide = run_convergence(&p, LStrategy::Constant(4.0), 14).unwrap();
    let last = |r: &cos_harness::experiments::Convergence| r.records.last().unwrap().error;
    assert!(last(&narrow) >= 1e3 * last(&wide));
}

#[test]
fn black_scholes_sqrt_range_is_exponential() {
    let p = Problem::bs_put(0.2).unwrap();
    let run = run_convergence(&p, LStrategy::Sqrt(0.2), 10).unwrap();
    assert!(run.records.last().unwrap().error < 1e-10);
}

#[test]
fn nmin_on_pricing_problems() {
    let p = Problem::bs_put(0.2).unwrap();
    let l = 6.939168087033823;
    assert_eq!(find_nmin(|n| p.error(l, l, n), f64::INFINITY, 1 << 24).unwrap(), 1);
    let n = find_nmin(|n| p.error(l, l, n), 1e-8, 1 << 24).unwrap();
    assert!((n as f64 - 120.0).abs() <= 6.0, "{n}");
    assert!(p.error(l, l, n).unwrap() <= 1e-8);
    assert!(find_nmin(|n| p.error(0.8, 0.8, n), 1e-8, 1 << 12).is_err());
}

#[test]
fn reference_price_cross_check() {
    let p = Problem::fmls_call().unwrap();
    assert!((p.reference - cos_harness::experiments::FMLS_CROSS_CHECK).abs() < 1e-11);
}
