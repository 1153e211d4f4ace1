use proptest::prelude::*;

use gearsynth::exact::{base_database, eval_circuit, exact_synthesize, optimal_tcount, Gate, GateWord};
use gearsynth::sim::{operator_distance, word_matrix};

fn word(max_len: usize) -> impl Strategy<Value = GateWord> {
    prop::collection::vec(prop::sample::select(Gate::ALL.to_vec()), 0..max_len).prop_map(GateWord::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn synthesis_round_trip(w in word(40)) {
        let u = eval_circuit(&w);
        prop_assert!(u.is_unitary());
        let s = exact_synthesize(&u).unwrap();
        prop_assert!(eval_circuit(&s).equals_up_to_phase(&u));
        let m = u.sde() as usize;
        let t = s.tcount();
        prop_assert!(t <= w.tcount());
        prop_assert!(m < 2 || (m - 2..=m).contains(&t), "sde {} T {}", m, t);
        prop_assert_eq!(optimal_tcount(&u).unwrap(), t);
    }

    #[test]
    fn float_image_matches_gate_product(w in word(30)) {
        let exact = eval_circuit(&w).to_complex();
        prop_assert!(operator_distance(&exact, &word_matrix(&w)) < 1e-10);
    }

    #[test]
    fn inverse_word_is_adjoint(w in word(30)) {
        let u = eval_circuit(&w);
        prop_assert!(eval_circuit(&w.inverse()).equals_exactly(&u.adjoint()));
        prop_assert!(u.mul(&u.adjoint()).equals_exactly(&eval_circuit(&GateWord::empty())));
    }

    #[test]
    fn phase_does_not_change_cost(w in word(30), k in 0i64..8) {
        let u = eval_circuit(&w);
        let v = u.with_phase(k);
        prop_assert!(v.equals_up_to_phase(&u));
        prop_assert_eq!(optimal_tcount(&v).unwrap(), optimal_tcount(&u).unwrap());
        prop_assert_eq!(v.canonical_key(), u.canonical_key());
    }
}

#[test]
fn base_database_is_consistent() {
    let db = base_database();
    assert_eq!(db.cliffords().len(), 24);
    for (key, w) in db.entries() {
        assert_eq!(&eval_circuit(w).canonical_key(), key, "{w}");
    }
}

#[test]
fn t_power_and_hth() {
    let hth = GateWord::parse("H T H").unwrap();
    let u = eval_circuit(&hth);
    assert_eq!(u.sde(), 3);
    assert_eq!(exact_synthesize(&u).unwrap().tcount(), 1);
    let tt = eval_circuit(&GateWord::parse("T T").unwrap());
    assert_eq!(exact_synthesize(&tt).unwrap().tcount(), 0);
    assert!(GateWord::parse("H Q").is_err());
}
