//! Breadth-first enumeration of first columns U·e₀ of Clifford+T unitaries,
//! layered by T-count and deduplicated modulo global phase. Machine integers
//! are used here; the enumeration depth is capped well below overflow.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::exact::{clifford_group, Gate, GateWord};
use crate::ring::Root2Scaled;

/// Enumeration depth above which memory use is no longer desk-scale.
pub const MAX_T_HARD_CAP: usize = 18;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Zw([i64; 4]);

impl Zw {
    const ZERO: Zw = Zw([0; 4]);

    fn mul(self, o: Zw) -> Zw {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Zw([
            a * e - b * h - c * g - d * f,
            a * f + b * e - c * h - d * g,
            a * g + b * f + c * e - d * h,
            a * h + b * g + c * f + d * e,
        ])
    }

    fn add(self, o: Zw) -> Zw {
        Zw([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }

    fn omega(self) -> Zw {
        let [a, b, c, d] = self.0;
        Zw([-d, a, b, c])
    }

    fn divisible(self) -> bool {
        let [a, b, c, d] = self.0;
        (a - c) % 2 == 0 && (b - d) % 2 == 0
    }

    fn div_sqrt2(self) -> Zw {
        let [a, b, c, d] = self.0;
        Zw([(b - d) / 2, (a + c) / 2, (b + d) / 2, (c - a) / 2])
    }

    fn norm_sq(self) -> (i64, i64) {
        let [a, b, c, d] = self.0;
        (a * a + b * b + c * c + d * d, a * b + b * c + c * d - d * a)
    }
}

/// A column (z₀, z₁)/√2^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Col {
    k: u32,
    z: [Zw; 2],
}

impl Col {
    /// Reduced denominator and the smallest of the eight phase rotations.
    fn canonical(mut self) -> Col {
        while self.k > 0 && self.z[0].divisible() && self.z[1].divisible() {
            self.z = [self.z[0].div_sqrt2(), self.z[1].div_sqrt2()];
            self.k -= 1;
        }
        let mut best = self;
        let mut r = self;
        for _ in 1..8 {
            r.z = [r.z[0].omega(), r.z[1].omega()];
            if r < best {
                best = r;
            }
        }
        best
    }

    fn pack(self) -> Packed {
        let mut v = [0i32; 8];
        for (i, x) in self.z[0].0.iter().chain(self.z[1].0.iter()).enumerate() {
            v[i] = i32::try_from(*x).expect("column coefficient exceeds i32");
        }
        Packed(v, self.k as u8)
    }

    fn unpack(p: Packed) -> Col {
        let v = p.0.map(i64::from);
        Col { k: p.1 as u32, z: [Zw([v[0], v[1], v[2], v[3]]), Zw([v[4], v[5], v[6], v[7]])] }
    }

    fn offdiag_abs_sq(self) -> Root2Scaled {
        let (a, b) = self.z[1].norm_sq();
        Root2Scaled::new(a, b, 2 * self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Packed([i32; 8], u8);

/// Exact 2×2 matrix with machine-integer numerators, phase dropped.
#[derive(Clone, Copy)]
struct Mat {
    m: [Zw; 4],
    k: u32,
}

impl Mat {
    fn apply(&self, c: Col) -> Col {
        let [a, b, cc, d] = self.m;
        Col { k: c.k + self.k, z: [a.mul(c.z[0]).add(b.mul(c.z[1])), cc.mul(c.z[0]).add(d.mul(c.z[1]))] }
    }
}

fn mat_of(word: &GateWord) -> Mat {
    let u = word.eval();
    let conv = |z: &crate::ring::ZOmega| {
        let f = |x: &num_bigint::BigInt| i64::try_from(x).expect("small Clifford entry");
        Zw([f(&z.a), f(&z.b), f(&z.c), f(&z.d)])
    };
    Mat { m: [conv(&u.m[0]), conv(&u.m[1]), conv(&u.m[2]), conv(&u.m[3])], k: u.kappa }
}

fn e0() -> Col {
    Col { k: 0, z: [Zw([1, 0, 0, 0]), Zw::ZERO] }
}

fn apply_t(c: Col) -> Col {
    Col { k: c.k, z: [c.z[0], c.z[1].omega()] }
}

struct Node {
    col: Packed,
    parent: u32,
    step: u8,
}

/// One enumerated column: its T-count, off-diagonal |u|², and a word whose
/// unitary has this first column up to phase.
#[derive(Clone, Debug)]
pub struct ColumnEntry {
    pub tcount: usize,
    pub abs_sq: Root2Scaled,
    pub abs: f64,
    pub index: usize,
}

/// All first columns of Clifford+T unitaries with T-count ≤ `max_t`, each
/// at its minimal T-count.
pub struct ColumnBfs {
    nodes: Vec<Node>,
    layers: Vec<std::ops::Range<usize>>,
    clifford_words: Vec<GateWord>,
}

impl ColumnBfs {
    pub fn new(max_t: usize) -> Result<Self> {
        if max_t > MAX_T_HARD_CAP {
            return Err(Error::Resource(format!(
                "column enumeration to T-count {max_t} exceeds the cap of {MAX_T_HARD_CAP}"
            )));
        }
        let cliffords = clifford_group();
        let mats: Vec<Mat> = cliffords.iter().map(|(_, w)| mat_of(w)).collect();
        let clifford_words: Vec<GateWord> = cliffords.into_iter().map(|(_, w)| w).collect();
        let mut seen: HashMap<Packed, u32> = HashMap::new();
        let mut nodes = Vec::new();
        let mut layers = Vec::new();
        let start = e0();
        for (ci, m) in mats.iter().enumerate() {
            let p = m.apply(start).canonical().pack();
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(p) {
                e.insert(nodes.len() as u32);
                nodes.push(Node { col: p, parent: NONE, step: ci as u8 });
            }
        }
        layers.push(0..nodes.len());
        for _ in 1..=max_t {
            let prev = layers.last().expect("layer 0").clone();
            let begin = nodes.len();
            for pi in prev {
                let tv = apply_t(Col::unpack(nodes[pi].col));
                for (ci, m) in mats.iter().enumerate() {
                    let p = m.apply(tv).canonical().pack();
                    if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(p) {
                        e.insert(nodes.len() as u32);
                        nodes.push(Node { col: p, parent: pi as u32, step: ci as u8 });
                    }
                }
            }
            layers.push(begin..nodes.len());
        }
        Ok(ColumnBfs { nodes, layers, clifford_words })
    }

    pub fn max_t(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer_len(&self, t: usize) -> usize {
        self.layers[t].len()
    }

    /// Entries with exactly `t` T gates.
    pub fn layer(&self, t: usize) -> impl Iterator<Item = ColumnEntry> + '_ {
        self.layers[t].clone().map(move |i| self.entry(i, t))
    }

    fn entry(&self, i: usize, t: usize) -> ColumnEntry {
        let abs_sq = Col::unpack(self.nodes[i].col).offdiag_abs_sq();
        let abs = abs_sq.to_f64().max(0.0).sqrt();
        ColumnEntry { tcount: t, abs_sq, abs, index: i }
    }

    /// A word whose unitary maps e₀ to the column, up to phase.
    pub fn word(&self, index: usize) -> GateWord {
        let mut gates = Vec::new();
        let mut i = index as u32;
        while i != NONE {
            let n = &self.nodes[i as usize];
            gates.extend_from_slice(self.clifford_words[n.step as usize].gates());
            if n.parent != NONE {
                gates.push(Gate::T);
            }
            i = n.parent;
        }
        GateWord(gates)
    }

    /// Smallest non-zero |u| among columns of exactly T-count `t`.
    pub fn min_nonzero(&self, t: usize) -> Option<ColumnEntry> {
        let mut best: Option<ColumnEntry> = None;
        for e in self.layer(t) {
            if e.abs_sq.is_zero() {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => e.abs_sq.cmp_value(&b.abs_sq).is_lt(),
            };
            if better {
                best = Some(e);
            }
        }
        best
    }
}

/// For each j ≤ `max_t`, the smallest non-zero |u₁₀| over words in the
/// letters {H, T} with at most j T gates, with one such word.
pub fn ht_word_minima(max_t: usize) -> Result<Vec<(usize, f64, GateWord)>> {
    if max_t > MAX_T_HARD_CAP + 4 {
        return Err(Error::Resource(format!("H/T enumeration to {max_t} T gates exceeds the cap")));
    }
    let h = mat_of(&GateWord(vec![Gate::H]));
    let t = mat_of(&GateWord(vec![Gate::T]));
    // 0-1 BFS: H is free, T costs one.
    let mut dist: HashMap<Packed, (usize, u32, u8)> = HashMap::new();
    let mut order: Vec<Packed> = Vec::new();
    let mut index: HashMap<Packed, u32> = HashMap::new();
    let mut dq = VecDeque::new();
    let s = e0().canonical().pack();
    dist.insert(s, (0, NONE, 0));
    dq.push_back(s);
    let mut done: HashMap<Packed, bool> = HashMap::new();
    while let Some(p) = dq.pop_front() {
        if done.insert(p, true).is_some() {
            continue;
        }
        index.insert(p, order.len() as u32);
        order.push(p);
        let (dp, _, _) = dist[&p];
        let c = Col::unpack(p);
        for (gate, mat, cost) in [(0u8, &h, 0usize), (1u8, &t, 1usize)] {
            let nd = dp + cost;
            if nd > max_t {
                continue;
            }
            let q = mat.apply(c).canonical().pack();
            let better = dist.get(&q).is_none_or(|&(d0, _, _)| nd < d0);
            if better {
                dist.insert(q, (nd, index[&p], gate));
                if cost == 0 {
                    dq.push_front(q);
                } else {
                    dq.push_back(q);
                }
            }
        }
    }
    let word_of = |mut p: Packed| {
        let mut gates = Vec::new();
        loop {
            let (_, parent, g) = dist[&p];
            if parent == NONE {
                break;
            }
            gates.push(if g == 0 { Gate::H } else { Gate::T });
            p = order[parent as usize];
        }
        GateWord(gates)
    };
    let mut best: Vec<Option<(Root2Scaled, Packed)>> = vec![None; max_t + 1];
    for p in &order {
        let (d, _, _) = dist[p];
        let a = Col::unpack(*p).offdiag_abs_sq();
        if a.is_zero() {
            continue;
        }
        if best[d].as_ref().is_none_or(|(b, _)| a.cmp_value(b).is_lt()) {
            best[d] = Some((a, *p));
        }
    }
    let mut out = Vec::new();
    let mut run: Option<(Root2Scaled, Packed)> = None;
    for (j, b) in best.into_iter().enumerate() {
        if let Some((a, p)) = b {
            if run.as_ref().is_none_or(|(r, _)| a.cmp_value(r).is_lt()) {
                run = Some((a, p));
            }
        }
        if let Some((a, p)) = &run {
            out.push((j, a.to_f64().max(0.0).sqrt(), word_of(*p)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_zero_has_six_columns() {
        let bfs = ColumnBfs::new(2).unwrap();
        assert_eq!(bfs.layer_len(0), 6);
        let min1 = bfs.min_nonzero(1).unwrap();
        assert!((min1.abs - (std::f64::consts::PI / 8.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn words_reproduce_columns() {
        let bfs = ColumnBfs::new(5).unwrap();
        for t in 0..=5 {
            for e in bfs.layer(t).take(40) {
                let w = bfs.word(e.index);
                assert_eq!(w.tcount(), t);
                let u = w.eval();
                assert_eq!(u.entry(1, 0).abs_sq(), e.abs_sq);
            }
        }
    }

    #[test]
    fn ht_minima_start_with_hth() {
        let m = ht_word_minima(3).unwrap();
        assert_eq!(m[0].0, 0);
        let (_, a1, w1) = &m[1];
        assert!((a1 - (std::f64::consts::PI / 8.0).sin()).abs() < 1e-12);
        assert_eq!(w1.tcount(), 1);
        assert!((w1.eval().entry(1, 0).abs() - a1).abs() < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        assert!(ColumnBfs::new(MAX_T_HARD_CAP + 1).is_err());
    }
}
