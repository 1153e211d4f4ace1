//! Exact 2×2 unitaries over Z[i, 1/√2], gate words, and T-optimal exact
//! synthesis by greedy H·T^l reduction followed by a table lookup.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{RingElement, ZOmega};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gate {
    H,
    T,
    Tdg,
    S,
    Sdg,
    X,
    Y,
    Z,
    W,
}

impl Gate {
    pub const ALL: [Gate; 9] = [Gate::H, Gate::T, Gate::Tdg, Gate::S, Gate::Sdg, Gate::X, Gate::Y, Gate::Z, Gate::W];

    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::T => "T",
            Gate::Tdg => "Tdg",
            Gate::S => "S",
            Gate::Sdg => "Sdg",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::W => "W",
        }
    }

    pub fn is_t(self) -> bool {
        matches!(self, Gate::T | Gate::Tdg)
    }

    /// Inverse gate; exact except for W, whose inverse ω⁷ is W up to phase.
    pub fn inverse(self) -> Gate {
        match self {
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            g => g,
        }
    }

    /// Exact matrix. W is the scalar ω.
    pub fn unitary(self) -> ExactUnitary {
        let z = |a: i64, b: i64, c: i64, d: i64| ZOmega::new(a, b, c, d);
        let one = || z(1, 0, 0, 0);
        let zero = ZOmega::zero;
        let diag = |x: ZOmega| ExactUnitary::from_numerators([one(), zero(), zero(), x], 0);
        match self {
            Gate::H => ExactUnitary::from_numerators([one(), one(), one(), z(-1, 0, 0, 0)], 1),
            Gate::T => diag(ZOmega::omega_pow(1)),
            Gate::Tdg => diag(ZOmega::omega_pow(7)),
            Gate::S => diag(ZOmega::omega_pow(2)),
            Gate::Sdg => diag(ZOmega::omega_pow(6)),
            Gate::Z => diag(z(-1, 0, 0, 0)),
            Gate::X => ExactUnitary::from_numerators([zero(), one(), one(), zero()], 0),
            Gate::Y => ExactUnitary::from_numerators([zero(), ZOmega::omega_pow(6), ZOmega::omega_pow(2), zero()], 0),
            Gate::W => ExactUnitary { m: [one(), zero(), zero(), one()], kappa: 0, phase: 1 },
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        self.unitary().to_complex()
    }
}

impl FromStr for Gate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Gate> {
        Gate::ALL
            .iter()
            .copied()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown gate token `{s}`")))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gate word; the written order is the matrix-product order, so
/// "A B" evaluates to A·B.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateWord(pub Vec<Gate>);

impl GateWord {
    pub fn new(gates: Vec<Gate>) -> Self {
        GateWord(gates)
    }

    pub fn empty() -> Self {
        GateWord(Vec::new())
    }

    /// Whitespace-separated tokens; a run of concatenated tokens such as
    /// "HTH" or "HZTHZTH" is also accepted.
    pub fn parse(text: &str) -> Result<Self> {
        let mut gates = Vec::new();
        for tok in text.split_whitespace() {
            match tok.parse::<Gate>() {
                Ok(g) => gates.push(g),
                Err(_) => gates.extend(split_glued(tok)?),
            }
        }
        Ok(GateWord(gates))
    }

    pub fn gates(&self) -> &[Gate] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tcount(&self) -> usize {
        self.0.iter().filter(|g| g.is_t()).count()
    }

    pub fn concat(&self, o: &GateWord) -> GateWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        GateWord(v)
    }

    /// Exact inverse (W is undone by W⁷).
    pub fn inverse(&self) -> GateWord {
        GateWord(
            self.0
                .iter()
                .rev()
                .flat_map(|&g| std::iter::repeat_n(g.inverse(), if g == Gate::W { 7 } else { 1 }))
                .collect(),
        )
    }

    pub fn eval(&self) -> ExactUnitary {
        eval_circuit(self)
    }
}

fn split_glued(tok: &str) -> Result<Vec<Gate>> {
    let mut out = Vec::new();
    let mut rest = tok;
    'outer: while !rest.is_empty() {
        for name in ["Tdg", "Sdg", "H", "T", "S", "X", "Y", "Z", "W"] {
            if let Some(r) = rest.strip_prefix(name) {
                out.push(name.parse()?);
                rest = r;
                continue 'outer;
            }
        }
        return Err(Error::Parse(format!("unknown gate token `{tok}`")));
    }
    Ok(out)
}

impl FromStr for GateWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GateWord::parse(s)
    }
}

impl fmt::Display for GateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|g| g.name()).collect();
        f.write_str(&names.join(" "))
    }
}

/// ω^phase · [[m0, m1], [m2, m3]] / √2^kappa.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactUnitary {
    pub m: [ZOmega; 4],
    pub kappa: u32,
    pub phase: u8,
}

/// Phase-free canonical key of a unitary.
pub type UnitaryKey = (u32, [ZOmega; 4]);

impl ExactUnitary {
    pub fn from_numerators(m: [ZOmega; 4], kappa: u32) -> Self {
        let mut u = ExactUnitary { m, kappa, phase: 0 };
        u.reduce();
        u
    }

    pub fn identity() -> Self {
        Self::from_numerators([ZOmega::one(), ZOmega::zero(), ZOmega::zero(), ZOmega::one()], 0)
    }

    fn reduce(&mut self) {
        if self.m.iter().all(|z| z.is_zero()) {
            self.kappa = 0;
            return;
        }
        while self.kappa > 0 && self.m.iter().all(|z| z.divisible_by_sqrt2()) {
            for z in self.m.iter_mut() {
                *z = z.div_sqrt2().expect("checked divisibility");
            }
            self.kappa -= 1;
        }
    }

    /// Entry (i, j) including the global phase.
    pub fn entry(&self, i: usize, j: usize) -> RingElement {
        RingElement::from_parts(self.m[2 * i + j].mul_omega(self.phase as i64), self.kappa)
    }

    pub fn mul(&self, o: &ExactUnitary) -> ExactUnitary {
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &o.m;
        let m = [a.mul(e).add(&b.mul(g)), a.mul(f).add(&b.mul(h)), c.mul(e).add(&d.mul(g)), c.mul(f).add(&d.mul(h))];
        let mut u = ExactUnitary { m, kappa: self.kappa + o.kappa, phase: (self.phase + o.phase) % 8 };
        u.reduce();
        u
    }

    pub fn adjoint(&self) -> ExactUnitary {
        let [a, b, c, d] = &self.m;
        ExactUnitary { m: [a.conj(), c.conj(), b.conj(), d.conj()], kappa: self.kappa, phase: (8 - self.phase) % 8 }
    }

    /// Multiply by the scalar ω^k.
    pub fn with_phase(&self, k: i64) -> ExactUnitary {
        ExactUnitary { m: self.m.clone(), kappa: self.kappa, phase: (self.phase as i64 + k).rem_euclid(8) as u8 }
    }

    /// U†U = I exactly.
    pub fn is_unitary(&self) -> bool {
        self.adjoint().mul(self).equals_exactly(&ExactUnitary::identity())
    }

    pub fn equals_exactly(&self, o: &ExactUnitary) -> bool {
        self.folded() == o.folded()
    }

    /// Numerators with the phase multiplied in.
    fn folded(&self) -> ([ZOmega; 4], u32) {
        (self.m.clone().map(|z| z.mul_omega(self.phase as i64)), self.kappa)
    }

    /// Canonical key modulo global phase: the smallest (kappa, entries) over
    /// the eight rotations ω^k.
    pub fn canonical_key(&self) -> UnitaryKey {
        let (m, kappa) = self.folded();
        let mut best: Option<[ZOmega; 4]> = None;
        for k in 0..8 {
            let r = m.clone().map(|z| z.mul_omega(k));
            if best.as_ref().is_none_or(|b| r < *b) {
                best = Some(r);
            }
        }
        (kappa, best.expect("eight rotations"))
    }

    /// The k in 0..8 with self = ω^k · other, if any.
    pub fn phase_relative_to(&self, other: &ExactUnitary) -> Option<u8> {
        (0..8u8).find(|&k| other.with_phase(k as i64).equals_exactly(self))
    }

    pub fn equals_up_to_phase(&self, o: &ExactUnitary) -> bool {
        self.canonical_key() == o.canonical_key()
    }

    /// sde of |u₀₀|², which equals sde of |u₁₀|² for a unitary.
    pub fn sde(&self) -> u32 {
        self.entry(0, 0).abs_sq().sde()
    }

    pub fn to_complex(&self) -> [[Complex64; 2]; 2] {
        let e = |i, j| self.entry(i, j).to_complex();
        [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
    }
}

/// Exact matrix product of the gate word, in written order.
pub fn eval_circuit(word: &GateWord) -> ExactUnitary {
    word.0.iter().fold(ExactUnitary::identity(), |acc, g| acc.mul(&g.unitary()))
}

/// Minimal-T words for every unitary with sde(|u|²) ≤ 3, keyed modulo
/// global phase.
pub struct BaseDatabase {
    map: HashMap<UnitaryKey, GateWord>,
    cliffords: Vec<(ExactUnitary, GateWord)>,
}

impl BaseDatabase {
    pub fn lookup(&self, u: &ExactUnitary) -> Option<&GateWord> {
        self.map.get(&u.canonical_key())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&UnitaryKey, &GateWord)> {
        self.map.iter()
    }

    /// The 24 Clifford classes with shortest {H, S} words.
    pub fn cliffords(&self) -> &[(ExactUnitary, GateWord)] {
        &self.cliffords
    }
}

/// Shortest {H, S} words for the 24 single-qubit Clifford classes.
pub fn clifford_group() -> Vec<(ExactUnitary, GateWord)> {
    let mut seen = HashSet::new();
    let id = ExactUnitary::identity();
    seen.insert(id.canonical_key());
    let mut out = vec![(id, GateWord::empty())];
    let mut i = 0;
    while i < out.len() {
        let (u, w) = out[i].clone();
        for g in [Gate::H, Gate::S] {
            let v = u.mul(&g.unitary());
            if seen.insert(v.canonical_key()) {
                out.push((v, w.concat(&GateWord(vec![g]))));
            }
        }
        i += 1;
    }
    out
}

/// Breadth-first closure by T-count; layer n+1 = {U·T·C}. Layer four is
/// generated as a closure check and must add nothing with sde ≤ 3.
pub fn build_base_database() -> BaseDatabase {
    let cliffords = clifford_group();
    assert_eq!(cliffords.len(), 24, "Clifford group modulo phase has 24 classes");
    let t = Gate::T.unitary();
    let mut seen: HashSet<UnitaryKey> = HashSet::new();
    let mut map = HashMap::new();
    let mut layer: Vec<(ExactUnitary, GateWord)> = Vec::new();
    for (u, w) in &cliffords {
        seen.insert(u.canonical_key());
        map.insert(u.canonical_key(), w.clone());
        layer.push((u.clone(), w.clone()));
    }
    for tcount in 1..=4 {
        let mut next = Vec::new();
        for (u, w) in &layer {
            let ut = u.mul(&t);
            for (c, cw) in &cliffords {
                let v = ut.mul(c);
                let key = v.canonical_key();
                if seen.insert(key.clone()) {
                    let word = w.concat(&GateWord(vec![Gate::T])).concat(cw);
                    if v.sde() <= 3 {
                        assert!(tcount <= 3, "closure check failed: sde ≤ 3 unitary needs {tcount} T gates");
                        map.insert(key, word.clone());
                    }
                    next.push((v, word));
                }
            }
        }
        layer = next;
    }
    BaseDatabase { map, cliffords }
}

/// Process-wide database, built on first use.
pub fn base_database() -> &'static BaseDatabase {
    static DB: OnceLock<BaseDatabase> = OnceLock::new();
    DB.get_or_init(build_base_database)
}

fn prefix_tokens(l: u8) -> Vec<Gate> {
    match l {
        0 => vec![Gate::H],
        1 => vec![Gate::Tdg, Gate::H],
        2 => vec![Gate::Sdg, Gate::H],
        3 => vec![Gate::Sdg, Gate::Tdg, Gate::H],
        _ => unreachable!(),
    }
}

/// A word that evaluates exactly to `u` (global phase included through W
/// tokens) with the minimal number of T gates.
pub fn exact_synthesize(u: &ExactUnitary) -> Result<GateWord> {
    if !u.is_unitary() {
        return Err(Error::InvalidInput("matrix is not unitary".into()));
    }
    let db = base_database();
    let h = Gate::H.unitary();
    let t_pows: Vec<ExactUnitary> = (0..4).map(|l| eval_circuit(&GateWord(vec![Gate::T; l]))).collect();
    let mut work = u.clone();
    let mut word = Vec::new();
    loop {
        let s = work.sde();
        if s <= 3 {
            break;
        }
        let reducing: Vec<(u8, ExactUnitary)> =
            (0..4u8).map(|l| (l, h.mul(&t_pows[l as usize]).mul(&work))).filter(|(_, w)| w.sde() + 1 == s).collect();
        let (l, next) = match reducing.len() {
            0 => return Err(Error::Invariant(format!("no H·T^l step reduces sde {s}"))),
            1 => reducing.into_iter().next().expect("one element"),
            n => {
                log::warn!("{n} choices of l reduce sde {s}; taking the smallest");
                reducing.into_iter().next().expect("non-empty")
            }
        };
        word.extend(prefix_tokens(l));
        work = next;
    }
    let tail = db.lookup(&work).ok_or_else(|| Error::Invariant(format!("database miss at sde {}", work.sde())))?;
    word.extend_from_slice(tail.gates());
    let got = eval_circuit(&GateWord(word.clone()));
    let k = u
        .phase_relative_to(&got)
        .ok_or_else(|| Error::Invariant("synthesized word differs by more than a phase".into()))?;
    word.extend(std::iter::repeat_n(Gate::W, k as usize));
    Ok(GateWord(word))
}

/// Minimal T-count over all Clifford+T circuits implementing `u` up to phase.
pub fn optimal_tcount(u: &ExactUnitary) -> Result<usize> {
    Ok(exact_synthesize(u)?.tcount())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Root2Scaled;

    fn w(s: &str) -> GateWord {
        GateWord::parse(s).unwrap()
    }

    #[test]
    fn basic_words() {
        assert!(eval_circuit(&w("H H")).equals_exactly(&ExactUnitary::identity()));
        let t = eval_circuit(&w("T"));
        assert_eq!(t.entry(1, 1), RingElement::omega_pow(1));
        assert!(t.entry(0, 1).is_zero());
        let hth = eval_circuit(&w("H T H"));
        assert_eq!(hth.entry(1, 0).abs_sq(), Root2Scaled::new(-1, 1, 3));
        assert_eq!(hth.sde(), 3);
    }

    #[test]
    fn glued_tokens() {
        assert_eq!(w("HZTHZTHZTH"), w("H Z T H Z T H Z T H"));
        assert_eq!(w("Tdg HSdg"), w("Tdg H Sdg"));
        assert!(GateWord::parse("H Q").is_err());
    }

    #[test]
    fn all_gates_unitary() {
        for g in Gate::ALL {
            assert!(g.unitary().is_unitary(), "{g}");
            assert!(g.unitary().mul(&g.inverse().unitary()).equals_up_to_phase(&ExactUnitary::identity()));
        }
    }

    #[test]
    fn database_shape() {
        let db = base_database();
        assert_eq!(db.cliffords().len(), 24);
        let hth = eval_circuit(&w("H T H"));
        assert_eq!(db.lookup(&hth).unwrap().tcount(), 1);
        for (_, word) in db.entries() {
            assert!(word.tcount() <= 3);
        }
    }

    #[test]
    fn synthesis_examples() {
        let hth = eval_circuit(&w("H T H"));
        let out = exact_synthesize(&hth).unwrap();
        assert_eq!(out.tcount(), 1);
        assert!(eval_circuit(&out).equals_exactly(&hth));
        let id = exact_synthesize(&ExactUnitary::identity()).unwrap();
        assert!(id.is_empty());
        assert_eq!(optimal_tcount(&eval_circuit(&w("T"))).unwrap(), 1);
        assert_eq!(optimal_tcount(&eval_circuit(&w("H S H S X"))).unwrap(), 0);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = ExactUnitary::from_numerators([ZOmega::one(), ZOmega::one(), ZOmega::zero(), ZOmega::one()], 0);
        assert!(exact_synthesize(&m).is_err());
    }
}
