use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;
use proptest::prelude::*;

use gearsynth::exact::{Gate, GateWord};
use gearsynth::gearbox::{composed_angle, gearbox_angle, gearbox_success_prob, Angle, GearboxNode};
use gearsynth::sim::{apply, normalized, phase_distance, run_gearbox, verify_gearbox, x_rotation, StateVector};

fn leaf() -> impl Strategy<Value = GateWord> {
    let fixed = prop::sample::select(vec!["H T H", "H Z T H", "T"]).prop_map(|w| GateWord::parse(w).unwrap());
    let gates = vec![Gate::H, Gate::T, Gate::Tdg, Gate::S, Gate::X, Gate::Z];
    let random = prop::collection::vec(prop::sample::select(gates), 1..16)
        .prop_filter("at most 6 T", |g| g.iter().filter(|x| x.is_t()).count() <= 6)
        .prop_map(GateWord::new);
    prop_oneof![fixed, random]
}

fn state() -> impl Strategy<Value = [Complex64; 2]> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-zero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
        .prop_map(|(a, b, c, d)| normalized(&[Complex64::new(a, b), Complex64::new(c, d)]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flat_gearbox_matches_closed_forms(leaves in prop::collection::vec(leaf(), 1..=4), input in state()) {
        let mags: Vec<f64> = leaves.iter().map(|w| w.eval().entry(1, 0).abs()).collect();
        let node = GearboxNode::Gearbox(leaves.into_iter().map(GearboxNode::Leaf).collect());
        let run = run_gearbox(&node, &input).unwrap();
        let s2: f64 = mags.iter().map(|m| m * m).product();
        let want_p = (1.0 - s2).powi(2) + s2 * s2;
        prop_assert!((run.success_prob - want_p).abs() < 1e-10);
        prop_assert!((gearbox_success_prob(&Angle::from_radians(s2.sqrt().asin())) - want_p).abs() < 1e-12);
        let phi = if s2 < 1.0 { gearbox_angle(&mags).unwrap().radians } else { std::f64::consts::FRAC_PI_2 };
        prop_assert!(phase_distance(&run.output, &apply(&x_rotation(phi), &input)) < 1e-10);
        let fail = apply(&x_rotation(-FRAC_PI_4), &input);
        for (p, f) in run.failures.iter().filter(|f| f.0 > 1e-12) {
            prop_assert!(phase_distance(f, &fail) < 1e-10, "branch p = {}", p);
        }
        let total: f64 = run.success_prob + run.failures.iter().map(|f| f.0).sum::<f64>();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(run.max_norm_drift < 1e-12);
    }
}

#[test]
fn composed_levels_reproduce_the_composed_angle() {
    let hth = GearboxNode::leaf("H T H").unwrap();
    let input = normalized(&[Complex64::new(0.6, 0.1), Complex64::new(0.2, -0.7)]);
    for d in 1..=6 {
        let node = GearboxNode::composed(hth.clone(), d);
        let run = run_gearbox(&node, &input).unwrap();
        let phi = composed_angle(&Angle::from_radians(FRAC_PI_8), d).unwrap();
        assert!(phase_distance(&run.output, &apply(&x_rotation(phi.radians), &input)) < 1e-10, "d = {d}");
        assert!(verify_gearbox(&node).unwrap().max_deviation() < 1e-10, "d = {d}");
    }
}

#[test]
fn worked_examples() {
    let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let r = run_gearbox(&GearboxNode::parse("GB(H T H)").unwrap(), &zero).unwrap();
    assert!((r.success_prob - 0.75).abs() < 1e-12);
    assert!(phase_distance(&r.output, &apply(&x_rotation(0.169919), &zero)) < 1e-6);
    let id = run_gearbox(&GearboxNode::parse("GB(I)").unwrap(), &zero).unwrap();
    assert!((id.success_prob - 1.0).abs() < 1e-14);
    assert!(phase_distance(&id.output, &zero) < 1e-14);
    assert!(StateVector::new(13).is_err());
    let big = GearboxNode::Gearbox(vec![GearboxNode::leaf("H T H").unwrap(); 12]);
    assert!(matches!(run_gearbox(&big, &zero), Err(gearsynth::Error::Resource(_))));
}
