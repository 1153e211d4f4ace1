use std::collections::{BTreeSet, HashSet};

use gearsynth::ring::{RingElement, Root2Scaled, ZOmega};
use gearsynth::search::{enumerate_candidates, min_at_sde, min_offdiag, norm_solvable_i64, table2, SearchCaps};

/// Class of u modulo multiplication by ω^k.
fn class_key(u: &RingElement) -> String {
    (0..8).map(|k| u.mul_omega(k).to_string()).min().unwrap()
}

fn one_minus(x: &Root2Scaled) -> Root2Scaled {
    Root2Scaled::one().sub(x)
}

/// Every u over √2^κ with 0 < |u|² ≤ 1, |u|²• ≤ 1 and sde(|u|²) = m, one
/// per class.
fn brute_force(m: u32) -> Vec<RingElement> {
    let kappa = m.div_ceil(2);
    // both embeddings bound |coefficient|² by 2^κ
    let r = (1i64 << kappa).isqrt() + 1;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                for d in -r..=r {
                    let u = RingElement::new(a, b, c, d, kappa);
                    let s = u.abs_sq();
                    if s.is_zero() || s.sde() != m {
                        continue;
                    }
                    if one_minus(&s).signum().is_lt() || one_minus(&s.sqrt2_conj()).signum().is_lt() {
                        continue;
                    }
                    if seen.insert(class_key(&u)) {
                        out.push(u);
                    }
                }
            }
        }
    }
    out
}

/// Whether 1 − |u|² = |v|² for some v over √2^κ.
fn completable(u: &RingElement, kappa: u32) -> bool {
    let (a, b) = one_minus(&u.abs_sq()).numerator_at(2 * kappa);
    norm_solvable_i64(i64::try_from(a).unwrap(), i64::try_from(b).unwrap()).is_some()
}

#[test]
fn enumeration_is_complete_for_small_sde() {
    for m in 3..=5 {
        let want: BTreeSet<String> = brute_force(m).iter().map(class_key).collect();
        let e = enumerate_candidates(m, 1.0).unwrap();
        let got: BTreeSet<String> = e.candidates.iter().map(class_key).collect();
        assert_eq!(got.len(), e.candidates.len(), "m = {m}: duplicate classes");
        assert_eq!(got, want, "m = {m}");
        let vals: Vec<f64> = e.candidates.iter().map(|c| c.abs_sq().to_f64()).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-15), "m = {m}: not ascending");
    }
}

#[test]
fn minima_match_brute_force() {
    let caps = SearchCaps::default();
    for m in 3u32..=6 {
        let kappa = m.div_ceil(2);
        let best = brute_force(m)
            .into_iter()
            .filter(|u| completable(u, kappa))
            .map(|u| u.abs_sq())
            .min_by(|x, y| x.cmp_value(y))
            .unwrap();
        let r = min_at_sde(m, 1.0, &caps).unwrap().unwrap();
        assert_eq!(r.u.abs_sq(), best, "m = {m}");
        let v = r.witness_v.unwrap();
        assert_eq!(r.u.abs_sq().add(&v.abs_sq()), Root2Scaled::one());
    }
}

#[test]
fn norm_equation_matches_four_loop_scan() {
    let lim = 200i64;
    let mut reachable = HashSet::new();
    let r = lim.isqrt();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                for d in -r..=r {
                    if a * a + b * b + c * c + d * d > lim {
                        continue;
                    }
                    let (x, y) = ZOmega::new(a, b, c, d).norm_sq();
                    reachable.insert((i64::try_from(x).unwrap(), i64::try_from(y).unwrap()));
                }
            }
        }
    }
    let mut checked = 0;
    for a in 0..=lim {
        let bmax = (a as f64 / 2f64.sqrt()) as i64 + 1;
        for b in -bmax..=bmax {
            let got = norm_solvable_i64(a, b);
            assert_eq!(got.is_some(), reachable.contains(&(a, b)), "A = {a}, B = {b}");
            if let Some(v) = got {
                let (x, y) = ZOmega::new(v[0], v[1], v[2], v[3]).norm_sq();
                assert_eq!((x, y), (a.into(), b.into()));
            }
            checked += 1;
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn table2_prefix_records() {
    let rows = table2(11, &SearchCaps::default()).unwrap();
    let records: Vec<(u32, String)> =
        rows.iter().filter(|r| r.record).map(|r| (r.n_t, format!("{:.4e}", r.best.as_ref().unwrap().abs_u))).collect();
    let want = [
        (1, "3.8268e-1"),
        (3, "2.7060e-1"),
        (4, "1.4645e-1"),
        (7, "5.6043e-2"),
        (9, "3.9628e-2"),
        (10, "2.1447e-2"),
        (11, "1.1607e-2"),
    ];
    let want: Vec<(u32, String)> = want.iter().map(|(n, s)| (*n, s.to_string())).collect();
    assert_eq!(records, want);
}

#[test]
fn caps_are_enforced() {
    let caps = SearchCaps { max_tcount: 5, ..SearchCaps::default() };
    assert!(matches!(min_offdiag(6, None, &caps), Err(gearsynth::Error::Resource(_))));
    let tiny = SearchCaps { max_pairlist: 10, ..SearchCaps::default() };
    assert!(matches!(min_at_sde(20, 1.0, &tiny), Err(gearsynth::Error::Resource(_))));
}
