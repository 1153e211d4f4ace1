use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use proptest::prelude::*;

use gearsynth::float_synth::{
    approx_synthesize, decompose_angle, mantissa_target, predicted_cost, realized_angle, select_exponent,
    synthesize_floating, FloatOptions, PredictorConstants,
};
use gearsynth::gearbox::weight_of;

fn log_angle() -> impl Strategy<Value = f64> {
    (-8.0f64..(FRAC_PI_4 * 0.999).log10()).prop_map(|e| 10f64.powf(e))
}

fn bound(phi: f64) -> f64 {
    (phi.tan() / (1.0 + phi.tan())).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exponent_is_feasible_and_ideal_mantissa_is_exact(phi in log_angle()) {
        let (d, phi_d) = select_exponent(phi).unwrap();
        let ls = if d.is_empty() { 0.0 } else { phi_d.log2_sin() };
        prop_assert!(ls.exp2() >= bound(phi) * (1.0 - 1e-12));
        let (target, _) = mantissa_target(phi, ls).unwrap();
        prop_assert!(target > 0.0 && target <= 1.0);
        let r = realized_angle(target, ls).unwrap();
        prop_assert!((r.radians / phi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relative_mantissa_error_stays_linear(phi in log_angle(), sign in prop::sample::select(vec![-1.0, 1.0])) {
        let (d, phi_d) = select_exponent(phi).unwrap();
        let ls = if d.is_empty() { 0.0 } else { phi_d.log2_sin() };
        let (target, _) = mantissa_target(phi, ls).unwrap();
        let shift = |delta: f64| realized_angle((target * (1.0 + sign * delta)).min(1.0), ls).unwrap().radians - phi;
        let (a, b, c) = (shift(1e-4), shift(2e-4), shift(4e-4));
        if target * (1.0 + 4e-4) < 1.0 {
            // first order in δ: doubling δ doubles the shift
            prop_assert!((b / a - 2.0).abs() < 0.01, "{} {}", a, b);
            prop_assert!((c / b - 2.0).abs() < 0.01, "{} {}", b, c);
            prop_assert!(c.abs() <= 10.0 * 4e-4 * phi);
        }
    }

    #[test]
    fn smaller_angles_never_lower_the_weight(phi in log_angle(), f in 0.01f64..1.0) {
        let w = |p: f64| {
            let d = select_exponent(p).unwrap().0;
            if d.is_empty() { 0 } else { weight_of(&d).unwrap() }
        };
        prop_assert!(w(phi * f) >= w(phi));
    }
}

#[test]
fn worked_plan() {
    assert_eq!(decompose_angle(PI / 3.0).unwrap().0, 1);
    assert!((decompose_angle(PI / 3.0).unwrap().1 - PI / 12.0).abs() < 1e-15);
    let (d, phi_d) = select_exponent(PI / 65536.0).unwrap();
    assert_eq!(d, vec![2]);
    assert!((phi_d.radians - 0.0294288).abs() < 1e-6);
    let (target, _) = mantissa_target(PI / 65536.0, phi_d.log2_sin()).unwrap();
    assert!((target - 0.23530).abs() < 5e-5);
    assert_eq!(select_exponent(PI / 256.0).unwrap().0, vec![1]);
}

#[test]
fn clifford_angles_need_no_t() {
    for k in 0..8 {
        let (plan, _) = synthesize_floating(k as f64 * FRAC_PI_4, 1e-3, &FloatOptions::default()).unwrap();
        assert_eq!(plan.static_tcount, 0);
        assert!(plan.node.is_none());
    }
}

#[test]
fn oracle_examples() {
    let x = approx_synthesize(1.0, 0.1, 4).unwrap();
    assert_eq!(x.tcount, 0);
    assert!((x.abs_u - 1.0).abs() < 1e-12);
    let hth = approx_synthesize(FRAC_PI_8.sin(), 0.0, 4).unwrap();
    assert_eq!(hth.tcount, 1);
    assert!(hth.within);
    let a = approx_synthesize(0.23530, 0.02, 12).unwrap();
    assert!(a.within && a.tcount == 6 && (a.abs_u - 0.25).abs() < 1e-12);
    assert!(approx_synthesize(0.2, 0.01, 40).is_err());
}

#[test]
fn predictor_shape() {
    let k = PredictorConstants::default();
    let p0 = predicted_cost(0.0, 0.01, &k).unwrap();
    assert!((p0.mean_tcount - (8.0 * 100f64.log2() + k.c)).abs() < 1e-9);
    let gamma = 10.0;
    let edge = 10f64.powf(-gamma * 143.0 / 200.0);
    assert!(predicted_cost(gamma, edge, &k).unwrap().crossover_ok);
    assert!(!predicted_cost(gamma, edge / 10.0, &k).unwrap().crossover_ok);
}
