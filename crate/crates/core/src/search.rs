//! Exhaustive search for the smallest non-zero off-diagonal magnitude |u|
//! among exact unitaries with sde(|u|²) = m, i.e. optimal T-count m − 2.
//!
//! Write u = (a + bω + cω² + dω³)/√2^κ with κ = ⌈m/2⌉. Then
//! √2·u = (x₀ + i·x₁)/√2^κ with x₀ = (b−d) + a√2 and x₁ = (b+d) + c√2,
//! so with K = κ + 1 we have |u|² = (x₀² + x₁²)/2^K, and the pair
//! (x₀, x₁) = (a₀ + b₀√2, a₁ + b₁√2) ranges over Z[√2]² with a₀ ≡ a₁ (mod 2).
//! Candidates obey x₀² + x₁² ≤ 2^K·ε and, since the √2-conjugate of a
//! unitary is unitary, x̄₀² + x̄₁² ≤ 2^K. Candidates are scanned in bands of
//! x₀² + x₁² using a list sorted by x², and the first one for which
//! |v|² = 1 − |u|² has a solution v ∈ Z[ω]/√2^κ is the minimum.

use std::cmp::Ordering;
use std::f64::consts::SQRT_2;

use num_integer::Roots;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{root2_sign_i128, RingElement, Root2Scaled, ZOmega};

pub use crate::columns::ht_word_minima;
pub use crate::fit::fit_log_model;

/// Caps that keep the search desk-scale.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchCaps {
    /// Largest optimal T-count searched.
    pub max_tcount: u32,
    /// Largest pair list built for a single sde.
    pub max_pairlist: usize,
    /// Worker threads (0 = rayon default).
    pub jobs: usize,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps { max_tcount: 40, max_pairlist: 20_000_000, jobs: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub m: u32,
    pub n_t: u32,
    pub u: RingElement,
    pub abs_u: f64,
    pub witness_v: Option<RingElement>,
}

impl SearchResult {
    pub fn abs_sq(&self) -> Root2Scaled {
        self.u.abs_sq()
    }

    /// `n_t,abs_u,a,b,c,d,kappa`.
    pub fn csv_row(&self) -> String {
        let z = &self.u.num;
        format!("{},{:.4e},{},{},{},{},{}", self.n_t, self.abs_u, z.a, z.b, z.c, z.d, self.u.kappa)
    }
}

pub const CSV_HEADER: &str = "n_t,abs_u,a,b,c,d,kappa";

/// x = a + b√2 with its square as a float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairEntry {
    pub a: i64,
    pub b: i64,
    pub value: f64,
}

/// Elements a + b√2 with x² ≤ `bound` and x̄² ≤ `conj_bound`, sorted by x².
#[derive(Clone, Debug)]
pub struct PairList {
    pub entries: Vec<PairEntry>,
}

fn stable_root2(a: i64, b: i64) -> f64 {
    crate::ring::signed_root2_value(a as f64, b as f64)
}

impl PairList {
    pub fn build(bound: f64, conj_bound: i64, max_len: usize) -> Result<PairList> {
        let r = bound.max(0.0).sqrt() * (1.0 + 1e-12) + 1e-12;
        let rb = (conj_bound as f64).sqrt() * (1.0 + 1e-12) + 1e-12;
        let bmax = ((r + rb) / (2.0 * SQRT_2)).floor() as i64 + 1;
        let mut entries = Vec::new();
        for b in -bmax..=bmax {
            let s = b as f64 * SQRT_2;
            let lo = (-r - s).max(-rb + s).floor() as i64 - 1;
            let hi = (r - s).min(rb + s).ceil() as i64 + 1;
            for a in lo..=hi {
                let x = stable_root2(a, b);
                if x * x > bound * (1.0 + 1e-12) {
                    continue;
                }
                // exact: (a − b√2)² = a² + 2b² − 2ab√2 ≤ conj_bound
                let (p, q) =
                    ((conj_bound as i128) - (a as i128).pow(2) - 2 * (b as i128).pow(2), 2 * (a as i128) * (b as i128));
                if root2_sign_i128(p, q) == Ordering::Less {
                    continue;
                }
                entries.push(PairEntry { a, b, value: x * x });
                if entries.len() > max_len {
                    return Err(Error::Resource(format!("pair list exceeds {max_len} entries")));
                }
            }
        }
        entries.sort_by(|x, y| x.value.total_cmp(&y.value).then((x.a, x.b).cmp(&(y.a, y.b))));
        Ok(PairList { entries })
    }

    /// Index range of entries with lo ≤ value < hi.
    fn range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let s = self.entries.partition_point(|e| e.value < lo);
        let t = self.entries.partition_point(|e| e.value < hi);
        s..t.max(s)
    }
}

/// v ∈ Z[ω] with |v|² = a + b√2, i.e. Σv_j² = a and
/// v₁(v₀+v₂) + v₃(v₂−v₀) = b. For each (v₀, v₂) the pair (v₁, v₃) lies on
/// a line and a circle, so it is found with one integer square root.
pub fn norm_solvable_i64(a: i64, b: i64) -> Option<[i64; 4]> {
    if a < 0 {
        return None;
    }
    // both embeddings of a + b√2 must be non-negative
    if root2_sign_i128(a as i128, b as i128) == Ordering::Less
        || root2_sign_i128(a as i128, -(b as i128)) == Ordering::Less
    {
        return None;
    }
    let (a, b) = (a as i128, b as i128);
    let r0 = a.sqrt();
    for v0 in -r0..=r0 {
        let rest = a - v0 * v0;
        let r2 = rest.sqrt();
        for v2 in -r2..=r2 {
            let r = rest - v2 * v2;
            if let Some((v1, v3)) = line_circle(v0 + v2, v2 - v0, b, r) {
                return Some([v0 as i64, v1 as i64, v2 as i64, v3 as i64]);
            }
        }
    }
    None
}

/// Integer (x, y) with p·x + q·y = b and x² + y² = r.
fn line_circle(p: i128, q: i128, b: i128, r: i128) -> Option<(i128, i128)> {
    let square_root = |n: i128| -> Option<i128> {
        if n < 0 {
            return None;
        }
        let s = n.sqrt();
        (s * s == n).then_some(s)
    };
    if p == 0 && q == 0 {
        if b != 0 {
            return None;
        }
        let rr = r.sqrt();
        return (0..=rr).find_map(|x| square_root(r - x * x).map(|y| (x, y)));
    }
    if q == 0 {
        if b % p != 0 {
            return None;
        }
        let x = b / p;
        return square_root(r - x * x).map(|y| (x, y));
    }
    // (p² + q²)x² − 2bp·x + b² − q²r = 0
    let n = p * p + q * q;
    let disc = square_root(n * r - b * b)?;
    for sx in [b * p + q.abs() * disc, b * p - q.abs() * disc] {
        if sx % n != 0 {
            continue;
        }
        let x = sx / n;
        if (b - p * x) % q == 0 {
            let y = (b - p * x) / q;
            if x * x + y * y == r {
                return Some((x, y));
            }
        }
    }
    None
}

/// Solve |v|² = ξ for ξ = (A + B√2)/√2^0.
pub fn norm_solvable(xi: &Root2Scaled) -> Result<Option<RingElement>> {
    if xi.m != 0 {
        return Err(Error::InvalidInput("norm_solvable expects an element of Z[√2] (m = 0)".into()));
    }
    let a = i64::try_from(&xi.a).map_err(|_| Error::Resource("norm too large".into()))?;
    let b = i64::try_from(&xi.b).map_err(|_| Error::Resource("norm too large".into()))?;
    if a < 0 {
        return Ok(None);
    }
    if a > 1 << 44 {
        return Err(Error::Resource(format!("norm {a} exceeds the enumeration limit")));
    }
    Ok(norm_solvable_i64(a, b).map(|v| RingElement::new(v[0], v[1], v[2], v[3], 0)))
}

/// A candidate numerator (a, b, c, d) over √2^κ with |u|² = (A + B√2)/2^K.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Cand {
    abcd: [i64; 4],
    big_a: i128,
    big_b: i128,
    value: f64,
}

fn rotate(z: [i64; 4]) -> [i64; 4] {
    [-z[3], z[0], z[1], z[2]]
}

fn is_min_rotation(z: [i64; 4]) -> bool {
    let mut r = z;
    for _ in 1..8 {
        r = rotate(r);
        if r < z {
            return false;
        }
    }
    true
}

fn cmp_cand(x: &Cand, y: &Cand) -> Ordering {
    root2_sign_i128(x.big_a - y.big_a, x.big_b - y.big_b).then(x.abcd.cmp(&y.abcd))
}

fn sde_of(big_a: i128, big_b: i128, k2: u32) -> u32 {
    Root2Scaled::new(big_a, big_b, k2).sde()
}

/// Outcome of a bounded enumeration.
#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Canonical representatives (modulo ω^k), ascending by |u|².
    pub candidates: Vec<RingElement>,
    /// No candidate satisfied the bound.
    pub too_tight: bool,
}

struct Level {
    m: u32,
    kappa: u32,
    k_big: u32,
    list: PairList,
    cap: f64,
}

impl Level {
    fn new(m: u32, eps: f64, caps: &SearchCaps) -> Result<Level> {
        if m < 3 {
            return Err(Error::InvalidInput("sde must be at least 3".into()));
        }
        if m > caps.max_tcount + 2 {
            return Err(Error::Resource(format!("T-count {} above the configured cap {}", m - 2, caps.max_tcount)));
        }
        let kappa = m.div_ceil(2);
        let k_big = kappa + 1;
        if k_big > 50 {
            return Err(Error::Resource("denominator exponent beyond machine-integer headroom".into()));
        }
        let pow = (1u64 << k_big) as f64;
        let cap = pow * eps.min(1.0);
        let list = PairList::build(cap, 1i64 << k_big, caps.max_pairlist)?;
        Ok(Level { m, kappa, k_big, list, cap })
    }

    /// Candidates with band_lo ≤ x₀² + x₁² < band_hi (float), filtered exactly.
    fn band(&self, lo: f64, hi: f64) -> Vec<Cand> {
        let e = &self.list.entries;
        let conj_cap = 1i128 << self.k_big;
        let k2 = 2 * self.k_big;
        let m = self.m;
        let mut out: Vec<Cand> = (0..e.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let x0 = e[i];
                let r = self.list.range(lo - x0.value, hi - x0.value);
                r.filter_map(move |j| {
                    let x1 = e[j];
                    if (x0.a - x1.a).rem_euclid(2) != 0 {
                        return None;
                    }
                    let value = x0.value + x1.value;
                    if value < lo || value >= hi || value > self.cap * (1.0 + 1e-12) {
                        return None;
                    }
                    let (a0, b0, a1, b1) = (x0.a as i128, x0.b as i128, x1.a as i128, x1.b as i128);
                    let big_a = a0 * a0 + 2 * b0 * b0 + a1 * a1 + 2 * b1 * b1;
                    let big_b = 2 * (a0 * b0 + a1 * b1);
                    if big_a == 0 && big_b == 0 {
                        return None;
                    }
                    if root2_sign_i128(conj_cap - big_a, big_b) == Ordering::Less {
                        return None;
                    }
                    let abcd = [x0.b, (x0.a + x1.a) / 2, x1.b, (x1.a - x0.a) / 2];
                    if !is_min_rotation(abcd) {
                        return None;
                    }
                    if sde_of(big_a, big_b, k2) != m {
                        return None;
                    }
                    Some(Cand { abcd, big_a, big_b, value })
                })
            })
            .collect();
        out.sort_by(cmp_cand);
        out
    }

    fn to_ring(&self, c: &Cand) -> RingElement {
        RingElement::from_parts(ZOmega::new(c.abcd[0], c.abcd[1], c.abcd[2], c.abcd[3]), self.kappa)
    }

    /// |v|² = 1 − |u|² with v over √2^κ: |v_num|² = 2^κ − |u_num|².
    fn witness(&self, c: &Cand) -> Option<RingElement> {
        let a = (1i64 << self.kappa) - (c.big_a / 2) as i64;
        let b = -(c.big_b / 2) as i64;
        norm_solvable_i64(a, b).map(|v| RingElement::new(v[0], v[1], v[2], v[3], self.kappa))
    }
}

/// Every u with sde(|u|²) = m and |u|² ≤ eps, one per class modulo ω^k.
pub fn enumerate_candidates(m: u32, eps: f64) -> Result<Enumeration> {
    let lvl = Level::new(m, eps, &SearchCaps::default())?;
    let cands = lvl.band(0.0, lvl.cap * (1.0 + 1e-9) + 1e-300);
    Ok(Enumeration { too_tight: cands.is_empty(), candidates: cands.iter().map(|c| lvl.to_ring(c)).collect() })
}

/// Minimal completable |u| with sde m and |u|² ≤ eps; `None` when the bound
/// is too tight.
pub fn min_at_sde(m: u32, eps: f64, caps: &SearchCaps) -> Result<Option<SearchResult>> {
    let lvl = Level::new(m, eps, caps)?;
    let top = lvl.cap * (1.0 + 1e-9);
    let mut lo = 0.0;
    let mut width = lvl.cap / 16.0;
    while lo <= top {
        let hi = (lo + width).min(top * (1.0 + 1e-12) + 1e-300);
        let cands = lvl.band(lo, hi);
        if cands.is_empty() {
            lo = hi;
            width *= 2.0;
            continue;
        }
        if let Some((c, v)) = cands.iter().find_map(|c| lvl.witness(c).map(|v| (*c, v))) {
            // guard against float ordering across the upper band edge
            let edge = c.value * (1.0 + 1e-12);
            let mut best = (c, v);
            if edge >= hi {
                for c2 in lvl.band(hi, edge * (1.0 + 1e-12)) {
                    if cmp_cand(&c2, &best.0) == Ordering::Less {
                        if let Some(v2) = lvl.witness(&c2) {
                            best = (c2, v2);
                        }
                    }
                }
            }
            let u = lvl.to_ring(&best.0);
            let abs_u = u.abs();
            return Ok(Some(SearchResult { m, n_t: m - 2, u, abs_u, witness_v: Some(best.1) }));
        }
        lo = hi;
        if lo > top {
            break;
        }
    }
    Ok(None)
}

/// Smallest non-zero |u| at optimal T-count n_t. The bound starts at
/// |u|² of the n_t − 1 result (or `eps` if given) and is widened by 4×
/// while too tight.
pub fn min_offdiag(n_t: u32, eps: Option<f64>, caps: &SearchCaps) -> Result<SearchResult> {
    if n_t == 0 {
        return Err(Error::InvalidInput("n_t must be at least 1".into()));
    }
    if n_t > caps.max_tcount {
        return Err(Error::Resource(format!("T-count {n_t} above the configured cap {}", caps.max_tcount)));
    }
    let mut eps = match eps {
        Some(e) => e,
        None if n_t == 1 => 1.0,
        None => {
            let prev = min_offdiag(n_t - 1, None, caps)?;
            prev.abs_sq().to_f64()
        }
    };
    loop {
        if let Some(r) = min_at_sde(n_t + 2, eps, caps)? {
            return Ok(r);
        }
        if eps >= 1.0 {
            return Err(Error::Invariant(format!("no completable entry at n_t = {n_t}")));
        }
        log::info!("bound {eps:.3e} too tight at n_t = {n_t}; widening");
        eps = (eps * 4.0).min(1.0);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Table2Row {
    pub n_t: u32,
    /// Minimal |u| at this T-count with |u|² ≤ the running record, if any.
    pub best: Option<SearchResult>,
    /// Whether `best` is strictly smaller than every earlier value.
    pub record: bool,
}

/// Running-record scan over n_t = 1..=max: a value is listed when it is
/// strictly smaller than all values at smaller T-counts.
pub fn table2(max_tcount: u32, caps: &SearchCaps) -> Result<Vec<Table2Row>> {
    let mut rows = Vec::new();
    let mut record: Option<Root2Scaled> = None;
    for n_t in 1..=max_tcount {
        let eps = record.as_ref().map_or(1.0, |r| r.to_f64());
        let best = min_at_sde(n_t + 2, eps, caps)?;
        let is_record = match (&best, &record) {
            (Some(b), Some(r)) => b.abs_sq().cmp_value(r) == Ordering::Less,
            (Some(_), None) => true,
            _ => false,
        };
        if is_record {
            record = best.as_ref().map(|b| b.abs_sq());
        }
        rows.push(Table2Row { n_t, best, record: is_record });
    }
    Ok(rows)
}

/// Run `f` on a pool with `jobs` workers (0 = default pool).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_equation_examples() {
        let one = norm_solvable(&Root2Scaled::new(1, 0, 0)).unwrap().unwrap();
        assert_eq!(one.abs_sq(), Root2Scaled::one());
        let zero = norm_solvable(&Root2Scaled::new(0, 0, 0)).unwrap().unwrap();
        assert!(zero.is_zero());
        let v = norm_solvable(&Root2Scaled::new(2, 1, 0)).unwrap().unwrap();
        assert_eq!(v.abs_sq(), Root2Scaled::new(2, 1, 0));
        assert!(norm_solvable(&Root2Scaled::new(1, 1, 0)).unwrap().is_none());
        assert!(norm_solvable(&Root2Scaled::new(-1, 0, 0)).unwrap().is_none());
        assert!(norm_solvable(&Root2Scaled::new(1, 0, 1)).is_err());
    }

    #[test]
    fn hth_is_the_first_candidate() {
        let e = enumerate_candidates(3, 1.0).unwrap();
        assert!(!e.too_tight);
        let first = &e.candidates[0];
        assert!((first.abs() - (std::f64::consts::PI / 8.0).sin()).abs() < 1e-12);
        for c in &e.candidates {
            assert_eq!(c.abs_sq().sde(), 3);
        }
        let tight = enumerate_candidates(3, 0.1).unwrap();
        assert!(tight.too_tight && tight.candidates.is_empty());
    }

    #[test]
    fn first_minima() {
        let caps = SearchCaps::default();
        let r1 = min_offdiag(1, None, &caps).unwrap();
        assert!((r1.abs_u - 0.38268).abs() < 1e-5);
        let r7 = min_offdiag(7, None, &caps).unwrap();
        assert!((r7.abs_u - 5.604e-2).abs() < 5e-6);
        let v = r7.witness_v.as_ref().unwrap();
        assert_eq!(r7.u.abs_sq().add(&v.abs_sq()), Root2Scaled::one());
        assert_eq!(r7.u.abs_sq().sde(), 9);
    }
}
