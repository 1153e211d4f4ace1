use std::f64::consts::FRAC_PI_8;

use gearsynth::cost::{
    analytic_plan_mean, composed_level_attempts, direct_gearbox_mean, expected_n, level_probs, simulate_composed,
    simulate_direct_gearbox, simulate_plan, variance_n_bound, variance_n_exact, AncillaMode,
};
use gearsynth::gearbox::{Angle, GearboxNode};
use gearsynth::search::with_jobs;

fn pi8() -> Angle {
    Angle::from_radians(FRAC_PI_8)
}

#[test]
fn same_seed_same_statistics_for_any_thread_count() {
    let a = with_jobs(1, || simulate_composed(&pi8(), 4, 20_000, 9).unwrap()).unwrap();
    let b = with_jobs(4, || simulate_composed(&pi8(), 4, 20_000, 9).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = simulate_composed(&pi8(), 4, 20_000, 10).unwrap();
    assert_ne!(a.mean, c.mean);
    let node = GearboxNode::parse("GB(H Z T H, C*2(H T H))").unwrap();
    let p = with_jobs(1, || simulate_plan(&node, 5000, 3, AncillaMode::Online).unwrap()).unwrap();
    let q = with_jobs(3, || simulate_plan(&node, 5000, 3, AncillaMode::Online).unwrap()).unwrap();
    assert_eq!(p, q);
}

#[test]
fn level_attempts_estimate_inverse_success() {
    let d = 5;
    let ps = level_probs(&pi8(), d).unwrap();
    let att = composed_level_attempts(&pi8(), d, 50_000, 2).unwrap();
    for (lp, (tries, wins)) in ps.iter().zip(att) {
        let ratio = tries as f64 / wins as f64;
        let p = lp.p;
        // binomial standard error of the success fraction
        let se = (p * (1.0 - p) / tries as f64).sqrt();
        assert!((wins as f64 / tries as f64 - p).abs() < 5.0 * se + 1e-12, "q = {}: 1/P {ratio} vs {}", lp.q, 1.0 / p);
    }
}

#[test]
fn moments_agree_with_recursions() {
    for d in 1..=5 {
        let st = simulate_composed(&pi8(), d, 100_000, 20 + d as u64).unwrap();
        let mean = expected_n(&pi8(), d).unwrap();
        let var = variance_n_exact(&pi8(), d).unwrap();
        assert!((st.mean - mean).abs() < 5.0 * st.std_error(), "d = {d}");
        assert!((st.variance / var - 1.0).abs() < 0.05, "d = {d}: {} vs {var}", st.variance);
        assert!(var <= variance_n_bound(&pi8(), d).unwrap());
    }
    assert!((expected_n(&pi8(), 2).unwrap() - 5.6471).abs() < 1e-4);
}

#[test]
fn plan_sampler_matches_analytic_mean() {
    for text in ["GB(H T H)", "C*3(H T H)", "GB(H Z T H Z T H Z T H, C*2(H T H))", "GB(C*1(H T H), C*3(H T H))"] {
        let node = GearboxNode::parse(text).unwrap();
        let (total, online) = analytic_plan_mean(&node).unwrap();
        let on = simulate_plan(&node, 40_000, 5, AncillaMode::Offline).unwrap();
        let all = simulate_plan(&node, 40_000, 5, AncillaMode::Online).unwrap();
        assert!((all.mean - total).abs() < 5.0 * all.std_error(), "{text}: {} vs {total}", all.mean);
        assert!((on.mean - online).abs() < 5.0 * on.std_error() + 1e-9, "{text}: {} vs {online}", on.mean);
        assert!(on.mean <= all.mean);
    }
}

#[test]
fn direct_gearbox_sampler() {
    let j = FRAC_PI_8.sin();
    let st = simulate_direct_gearbox(j, 1, 3, 40_000, 4).unwrap();
    let want = direct_gearbox_mean(j, 1, 3).unwrap();
    assert!((st.mean - want).abs() < 5.0 * st.std_error());
    assert_eq!(st.percentile(2.5).unwrap() as u64 % 14, 0);
    assert!(simulate_direct_gearbox(1.5, 1, 3, 10, 4).is_err());
    assert!(simulate_composed(&Angle::from_radians(1.0), 2, 10, 1).is_err());
}
