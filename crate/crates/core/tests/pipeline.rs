use ftlab::estimator::{simulate, Accounting, BenchmarkSpec, RateRecord};
use ftlab::fit::{fit_fixed_exponent, FitPoint};
use ftlab::{CodeSpec, NoiseParams};

fn run(code: &str, p: f64, shots: u64, seed: u64) -> RateRecord {
    let code = CodeSpec::parse(code).unwrap();
    let mut spec = BenchmarkSpec::new(code, NoiseParams::new(p, p).unwrap());
    spec.shots = shots;
    spec.seed = seed;
    simulate(&spec, Accounting::default_for(code)).unwrap()
}

#[test]
fn records_round_trip_through_json() {
    let r = run("c4", 2e-3, 2_000, 5);
    let text = serde_json::to_string(&r).unwrap();
    let back: RateRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn same_seed_gives_the_same_record() {
    assert_eq!(run("steane:1", 1e-3, 3_000, 11), run("steane:1", 1e-3, 3_000, 11));
    assert_ne!(run("c4", 3e-3, 3_000, 11).verification, run("c4", 3e-3, 3_000, 12).verification);
}

#[test]
fn steane_fit_lands_near_the_quadratic_curve() {
    let pts: Vec<FitPoint> = [5e-4, 1e-3]
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let r = run("steane:1", p, 20_000, 100 + i as u64);
            FitPoint::new(p, r.p_l, r.sigma_log10)
        })
        .collect();
    let (a, _) = fit_fixed_exponent(&pts, 2.0).unwrap();
    assert!((4e3..1.6e4).contains(&a.value), "{}", a.value);
}

#[test]
fn rate_grows_with_the_physical_error_rate() {
    let low = run("c4", 1e-3, 10_000, 1);
    let high = run("c4", 4e-3, 10_000, 1);
    assert!(high.p_l > 2.0 * low.p_l, "{} {}", low.p_l, high.p_l);
}
