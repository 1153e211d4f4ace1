//! Exact arithmetic in Z[i, 1/√2] = Z[ω][1/√2] with ω = e^{iπ/4}, and in
//! Z[√2] scaled by powers of √2.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Numerator a + bω + cω² + dω³ of a ring element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ZOmega {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl ZOmega {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        ZOmega { a: a.into(), b: b.into(), c: c.into(), d: d.into() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(1, 0, 0, 0)
    }

    /// ω^k for any integer k.
    pub fn omega_pow(k: i64) -> Self {
        Self::one().mul_omega(k)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn coeffs(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn add(&self, o: &Self) -> Self {
        ZOmega { a: &self.a + &o.a, b: &self.b + &o.b, c: &self.c + &o.c, d: &self.d + &o.d }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ZOmega { a: &self.a - &o.a, b: &self.b - &o.b, c: &self.c - &o.c, d: &self.d - &o.d }
    }

    pub fn neg(&self) -> Self {
        ZOmega { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let (e, f, g, h) = (&o.a, &o.b, &o.c, &o.d);
        ZOmega {
            a: a * e - b * h - c * g - d * f,
            b: a * f + b * e - c * h - d * g,
            c: a * g + b * f + c * e - d * h,
            d: a * h + b * g + c * f + d * e,
        }
    }

    /// Multiply by ω^k.
    pub fn mul_omega(&self, k: i64) -> Self {
        let mut z = self.clone();
        for _ in 0..k.rem_euclid(8) {
            z = ZOmega { a: -z.d, b: z.a, c: z.b, d: z.c };
        }
        z
    }

    /// Complex conjugate: ω ↦ ω⁷ = −ω³.
    pub fn conj(&self) -> Self {
        ZOmega { a: self.a.clone(), b: -&self.d, c: -&self.c, d: -&self.b }
    }

    /// Multiply by √2 = ω − ω³.
    pub fn mul_sqrt2(&self) -> Self {
        ZOmega { a: &self.b - &self.d, b: &self.a + &self.c, c: &self.b + &self.d, d: &self.c - &self.a }
    }

    pub fn divisible_by_sqrt2(&self) -> bool {
        (&self.a - &self.c).is_even() && (&self.b - &self.d).is_even()
    }

    /// Exact division by √2; `None` if not divisible.
    pub fn div_sqrt2(&self) -> Option<Self> {
        if !self.divisible_by_sqrt2() {
            return None;
        }
        let two = BigInt::from(2);
        Some(ZOmega {
            a: (&self.b - &self.d) / &two,
            b: (&self.a + &self.c) / &two,
            c: (&self.b + &self.d) / &two,
            d: (&self.c - &self.a) / &two,
        })
    }

    /// |z|² as A + B√2 with A = a²+b²+c²+d², B = ab+bc+cd−da.
    pub fn norm_sq(&self) -> (BigInt, BigInt) {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        (a * a + b * b + c * c + d * d, a * b + b * c + c * d - d * a)
    }

    pub fn to_complex(&self) -> Complex64 {
        let f = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN);
        let (a, b, c, d) = (f(&self.a), f(&self.b), f(&self.c), f(&self.d));
        Complex64::new(a + (b - d) / SQRT2, c + (b + d) / SQRT2)
    }

    /// The rotation ω^k·self that is lexicographically smallest, with k.
    pub fn min_rotation(&self) -> (ZOmega, u8) {
        let mut best = (self.clone(), 0u8);
        let mut z = self.clone();
        for k in 1..8u8 {
            z = z.mul_omega(1);
            if z < best.0 {
                best = (z.clone(), k);
            }
        }
        best
    }
}

/// Exact value (a + bω + cω² + dω³)/√2^κ, kept in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    pub num: ZOmega,
    pub kappa: u32,
}

impl RingElement {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
        kappa: u32,
    ) -> Self {
        Self::from_parts(ZOmega::new(a, b, c, d), kappa)
    }

    /// Canonicalizing constructor.
    pub fn from_parts(mut num: ZOmega, mut kappa: u32) -> Self {
        if num.is_zero() {
            return RingElement { num, kappa: 0 };
        }
        while kappa > 0 {
            match num.div_sqrt2() {
                Some(q) => {
                    num = q;
                    kappa -= 1;
                }
                None => break,
            }
        }
        RingElement { num, kappa }
    }

    pub fn zero() -> Self {
        Self::from_parts(ZOmega::zero(), 0)
    }

    pub fn one() -> Self {
        Self::from_parts(ZOmega::one(), 0)
    }

    pub fn omega_pow(k: i64) -> Self {
        Self::from_parts(ZOmega::omega_pow(k), 0)
    }

    /// 1/√2.
    pub fn inv_sqrt2() -> Self {
        Self::from_parts(ZOmega::one(), 1)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_canonical(&self) -> bool {
        if self.num.is_zero() {
            return self.kappa == 0;
        }
        self.kappa == 0 || !self.num.divisible_by_sqrt2()
    }

    /// The numerator rewritten over √2^k for k ≥ kappa.
    pub fn numerator_at(&self, k: u32) -> ZOmega {
        assert!(k >= self.kappa, "cannot lower the denominator exponent");
        let mut z = self.num.clone();
        for _ in self.kappa..k {
            z = z.mul_sqrt2();
        }
        z
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = self.kappa.max(o.kappa);
        Self::from_parts(self.numerator_at(k).add(&o.numerator_at(k)), k)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        RingElement { num: self.num.neg(), kappa: self.kappa }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_parts(self.num.mul(&o.num), self.kappa + o.kappa)
    }

    pub fn mul_omega(&self, k: i64) -> Self {
        RingElement { num: self.num.mul_omega(k), kappa: self.kappa }
    }

    pub fn conj(&self) -> Self {
        RingElement { num: self.num.conj(), kappa: self.kappa }
    }

    pub fn abs_sq(&self) -> Root2Scaled {
        let (a, b) = self.num.norm_sq();
        Root2Scaled::new(a, b, 2 * self.kappa)
    }

    pub fn to_complex(&self) -> Complex64 {
        self.num.to_complex() / SQRT2.powi(self.kappa as i32)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = &self.num;
        write!(f, "({},{},{},{})/√2^{}", z.a, z.b, z.c, z.d, self.kappa)
    }
}

/// Exact value (A + B√2)/√2^m, kept in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Root2Scaled {
    pub a: BigInt,
    pub b: BigInt,
    pub m: u32,
}

impl Root2Scaled {
    /// Canonicalizing constructor: while m > 0 and A is even,
    /// (A + B√2)/√2 = B + (A/2)√2.
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, m: u32) -> Self {
        let (mut a, mut b, mut m) = (a.into(), b.into(), m);
        if a.is_zero() && b.is_zero() {
            return Root2Scaled { a, b, m: 0 };
        }
        while m > 0 && a.is_even() {
            let half = &a / 2;
            a = b;
            b = half;
            m -= 1;
        }
        Root2Scaled { a, b, m }
    }

    pub fn zero() -> Self {
        Self::new(0, 0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0, 0)
    }

    /// Smallest denominator exponent.
    pub fn sde(&self) -> u32 {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Numerator over √2^k for k ≥ m.
    pub fn numerator_at(&self, k: u32) -> (BigInt, BigInt) {
        assert!(k >= self.m, "cannot lower the denominator exponent");
        let (mut a, mut b) = (self.a.clone(), self.b.clone());
        for _ in self.m..k {
            let na = &b * 2;
            b = a;
            a = na;
        }
        (a, b)
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = self.m.max(o.m);
        let (a1, b1) = self.numerator_at(k);
        let (a2, b2) = o.numerator_at(k);
        Self::new(a1 + a2, b1 + b2, k)
    }

    pub fn neg(&self) -> Self {
        Root2Scaled { a: -&self.a, b: -&self.b, m: self.m }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let a = &self.a * &o.a + 2 * &self.b * &o.b;
        let b = &self.a * &o.b + &self.b * &o.a;
        Self::new(a, b, self.m + o.m)
    }

    /// Image under √2 ↦ −√2. An odd exponent is first made even so that the
    /// automorphism acts on the numerator alone.
    pub fn sqrt2_conj(&self) -> Self {
        let k = self.m + (self.m & 1);
        let (a, b) = self.numerator_at(k);
        Self::new(a, -b, k)
    }

    pub fn to_f64(&self) -> f64 {
        let (a, b) = (self.a.to_f64().unwrap_or(f64::NAN), self.b.to_f64().unwrap_or(f64::NAN));
        signed_root2_value(a, b) / SQRT2.powi(self.m as i32)
    }

    /// Sign of the value under the embedding √2 ↦ +√2.
    pub fn signum(&self) -> Ordering {
        root2_sign(&self.a, &self.b)
    }

    /// Exact comparison under the embedding √2 ↦ +√2.
    pub fn cmp_value(&self, o: &Self) -> Ordering {
        self.sub(o).signum()
    }
}

impl fmt::Display for Root2Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+{}√2)/√2^{}", self.a, self.b, self.m)
    }
}

/// a + b√2 in floating point without catastrophic cancellation.
pub fn signed_root2_value(a: f64, b: f64) -> f64 {
    let x = a + b * SQRT2;
    if a * b < 0.0 {
        let y = a - b * SQRT2;
        if y != 0.0 {
            return (a * a - 2.0 * b * b) / y;
        }
    }
    x
}

/// Sign of p + q√2.
pub fn root2_sign(p: &BigInt, q: &BigInt) -> Ordering {
    let zero = BigInt::zero();
    let sp = p.cmp(&zero);
    let sq = q.cmp(&zero);
    match (sp, sq) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
        (Ordering::Less, Ordering::Less) => Ordering::Less,
        (Ordering::Greater, Ordering::Less) => (p * p).cmp(&(BigInt::from(2) * q * q)),
        (Ordering::Less, Ordering::Greater) => (BigInt::from(2) * q * q).cmp(&(p * p)),
    }
}

/// Sign of p + q√2 for machine integers.
pub fn root2_sign_i128(p: i128, q: i128) -> Ordering {
    match (p.cmp(&0), q.cmp(&0)) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
        (Ordering::Less, Ordering::Less) => Ordering::Less,
        (Ordering::Greater, Ordering::Less) => (p * p).cmp(&(2 * q * q)),
        (Ordering::Less, Ordering::Greater) => (2 * q * q).cmp(&(p * p)),
    }
}

fn big_to_json<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match x.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

fn big_from_json<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Int(v) => Ok(BigInt::from(v)),
        Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
    }
}

#[derive(Serialize, Deserialize)]
struct RingJson {
    #[serde(serialize_with = "big_to_json", deserialize_with = "big_from_json")]
    a: BigInt,
    #[serde(serialize_with = "big_to_json", deserialize_with = "big_from_json")]
    b: BigInt,
    #[serde(serialize_with = "big_to_json", deserialize_with = "big_from_json")]
    c: BigInt,
    #[serde(serialize_with = "big_to_json", deserialize_with = "big_from_json")]
    d: BigInt,
    kappa: u32,
}

impl Serialize for RingElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let z = &self.num;
        RingJson { a: z.a.clone(), b: z.b.clone(), c: z.c.clone(), d: z.d.clone(), kappa: self.kappa }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RingElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = RingJson::deserialize(d)?;
        Ok(RingElement::from_parts(ZOmega { a: j.a, b: j.b, c: j.c, d: j.d }, j.kappa))
    }
}

impl RingElement {
    /// Absolute value of the represented complex number.
    pub fn abs(&self) -> f64 {
        self.abs_sq().to_f64().max(0.0).sqrt()
    }
}

/// Integer square root floor for non-negative i64.
pub fn isqrt_i64(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64, c: i64, d: i64, k: u32) -> RingElement {
        RingElement::new(a, b, c, d, k)
    }

    #[test]
    fn omega_times_omega_cubed_is_minus_one() {
        assert_eq!(RingElement::omega_pow(1).mul(&RingElement::omega_pow(3)), r(-1, 0, 0, 0, 0));
    }

    #[test]
    fn one_minus_omega_over_two() {
        let x = r(1, -1, 0, 0, 2);
        let n = x.abs_sq();
        assert_eq!(n, Root2Scaled::new(-1, 1, 3));
        assert!((n.to_f64() - (2.0 - SQRT2) / 4.0).abs() < 1e-15);
        let via_mul = x.mul(&x.conj());
        assert!(via_mul.num.b.is_zero() || via_mul.to_complex().im.abs() < 1e-15);
        assert!((via_mul.to_complex().re - (2.0 - SQRT2) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn abs_sq_of_units() {
        assert_eq!(RingElement::zero().abs_sq(), Root2Scaled::new(0, 0, 0));
        for k in 0..8 {
            assert_eq!(RingElement::omega_pow(k).abs_sq(), Root2Scaled::one());
        }
    }

    #[test]
    fn sde_examples() {
        assert_eq!(Root2Scaled::one().sde(), 0);
        assert_eq!(Root2Scaled::new(1, 0, 1).sde(), 1);
        assert_eq!(Root2Scaled::new(2, -1, 4).sde(), 3);
        assert_eq!(Root2Scaled::new(4, 6, 0).sde(), 0);
    }

    #[test]
    fn sqrt2_conj_examples() {
        assert_eq!(Root2Scaled::new(3, 1, 0).sqrt2_conj(), Root2Scaled::new(3, -1, 0));
        let x = Root2Scaled::new(2, -1, 0);
        assert!(x.to_f64() > 0.0 && x.sqrt2_conj().to_f64() > 0.0);
        assert!((x.sqrt2_conj().to_f64() - (2.0 + SQRT2)).abs() < 1e-15);
        let y = Root2Scaled::new(1, 0, 1);
        assert!((y.sqrt2_conj().to_f64() + 1.0 / SQRT2).abs() < 1e-15);
    }

    #[test]
    fn canonical_division() {
        let x = r(2, 0, 0, 0, 2);
        assert_eq!(x, RingElement::one());
        let s = RingElement::from_parts(ZOmega::one().mul_sqrt2(), 1);
        assert_eq!(s, RingElement::one());
    }

    #[test]
    fn json_round_trip() {
        let x = r(3, -1, 0, 7, 5);
        let j = serde_json::to_string(&x).unwrap();
        assert_eq!(j, r#"{"a":3,"b":-1,"c":0,"d":7,"kappa":5}"#);
        let y: RingElement = serde_json::from_str(&j).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn display_form() {
        assert_eq!(r(1, -1, 0, 0, 2).to_string(), "(1,-1,0,0)/√2^2");
    }

    #[test]
    fn root2_sign_cases() {
        use Ordering::*;
        assert_eq!(root2_sign_i128(3, -2), Greater);
        assert_eq!(root2_sign_i128(2, -2), Less);
        assert_eq!(root2_sign_i128(-3, 2), Less);
        assert_eq!(root2_sign_i128(0, 0), Equal);
        assert_eq!(root2_sign(&BigInt::from(-1), &BigInt::from(1)), Greater);
    }
}
