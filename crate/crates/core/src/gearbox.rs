//! Gearbox angle algebra and static T accounting.
//!
//! A flat gearbox over children with off-diagonal magnitudes |u_l| has input
//! angle θ with sin²θ = Π|u_l|²; on success it applies e^{−i·tan⁻¹(tan²θ)·X}
//! with probability cos⁴θ + sin⁴θ. Angles are carried together with
//! log₂(1/angle) so that arbitrarily small rotations stay representable.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, LN_2};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::GateWord;

/// Exact tangent-power descriptor: the angle is tan⁻¹(tan^(2^exponent)(base)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TanPower {
    pub base: f64,
    pub exponent: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Angle {
    /// Value in radians; may underflow to zero for tiny angles.
    pub radians: f64,
    /// log₂(1/radians), accurate even when `radians` underflows.
    pub log2_inv: f64,
    pub tan_power: Option<TanPower>,
}

impl Angle {
    pub fn from_radians(radians: f64) -> Angle {
        Angle { radians, log2_inv: -radians.log2(), tan_power: None }
    }

    pub fn zero() -> Angle {
        Angle::from_radians(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.log2_inv == f64::INFINITY
    }

    /// tan⁻¹(x) for x = 2^lx.
    pub fn atan_of_log2(lx: f64) -> Angle {
        if lx == f64::NEG_INFINITY {
            return Angle::zero();
        }
        let x = lx.exp2();
        let radians = x.atan();
        let log2_inv = if x > 1e-6 {
            -radians.log2()
        } else {
            // tan⁻¹x = x(1 − x²/3 + …)
            -lx + x * x / (3.0 * LN_2)
        };
        Angle { radians, log2_inv, tan_power: None }
    }

    /// sin⁻¹(y) for y = 2^ly.
    pub fn asin_of_log2(ly: f64) -> Angle {
        if ly == f64::NEG_INFINITY {
            return Angle::zero();
        }
        let y = ly.exp2().min(1.0);
        let radians = y.asin();
        let log2_inv = if y > 1e-6 {
            -radians.log2()
        } else {
            // sin⁻¹y = y(1 + y²/6 + …)
            -ly - y * y / (6.0 * LN_2)
        };
        Angle { radians, log2_inv, tan_power: None }
    }

    /// log₂ sin(angle), accurate for tiny angles.
    pub fn log2_sin(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        if self.radians > 1e-6 {
            self.radians.sin().log2()
        } else {
            let r = self.radians;
            -self.log2_inv - r * r / (6.0 * LN_2)
        }
    }

    /// log₂ tan(angle).
    pub fn log2_tan(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        if self.radians > 1e-6 {
            self.radians.tan().log2()
        } else {
            let r = self.radians;
            -self.log2_inv + r * r / (3.0 * LN_2)
        }
    }

    /// sin²(angle), possibly underflowing to zero.
    pub fn sin_sq(&self) -> f64 {
        (2.0 * self.log2_sin()).exp2()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radians > 0.0 || self.is_zero() {
            write!(f, "{:.6e}", self.radians)
        } else {
            write!(f, "2^-{:.4}", self.log2_inv)
        }
    }
}

/// Output angle tan⁻¹(tan²θ) for a gearbox whose input has log₂ sin²θ = `ls`.
pub fn gearbox_angle_from_log2_sin_sq(ls: f64) -> Result<Angle> {
    if ls > 1e-12 {
        return Err(Error::InvalidInput("product of off-diagonal magnitudes exceeds 1".into()));
    }
    // all children anti-diagonal: θ = π/2, the gearbox enacts −iX surely
    if ls >= 0.0 {
        return Ok(Angle::atan_of_log2(f64::INFINITY));
    }
    if ls == f64::NEG_INFINITY {
        return Ok(Angle::zero());
    }
    let s = ls.exp2();
    // tan²θ = s/(1−s)
    let lx = ls - (-s).ln_1p() / LN_2;
    Ok(Angle::atan_of_log2(lx))
}

/// Output angle tan⁻¹(tan²θ) with sin²θ = Π mags².
pub fn gearbox_angle(offdiag_mags: &[f64]) -> Result<Angle> {
    let mut ls = 0.0;
    for &m in offdiag_mags {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidInput(format!("off-diagonal magnitude {m} outside [0,1]")));
        }
        ls += 2.0 * m.log2();
    }
    gearbox_angle_from_log2_sin_sq(ls)
}

/// cos⁴θ + sin⁴θ = 1 − 2 sin²θ cos²θ.
pub fn gearbox_success_prob(theta: &Angle) -> f64 {
    success_prob_from_sin_sq(theta.sin_sq())
}

pub fn success_prob_from_sin_sq(s: f64) -> f64 {
    1.0 - 2.0 * s * (1.0 - s)
}

/// tan⁻¹(tan^(2^d) θ₀), the angle of the d-fold composed gearbox.
pub fn composed_angle(theta0: &Angle, d: u32) -> Result<Angle> {
    if d == 0 {
        return Err(Error::InvalidInput("composition depth must be at least 1".into()));
    }
    if theta0.is_zero() || theta0.radians >= FRAC_PI_4 + 1e-15 {
        return Err(Error::InvalidInput(format!("θ₀ = {} outside (0, π/4)", theta0.radians)));
    }
    let lx = 2f64.powi(d as i32) * theta0.log2_tan();
    let mut a = Angle::atan_of_log2(lx);
    a.tan_power = Some(TanPower { base: theta0.radians, exponent: d });
    Ok(a)
}

/// Exponent set ↔ even weight w = Σ 2^{D_j}.
pub fn weight_of(d_set: &[u32]) -> Result<u64> {
    validate_d(d_set)?;
    Ok(d_set.iter().map(|&j| 1u64 << j).sum())
}

/// Exponent set of an even weight w ≥ 2.
pub fn d_of_weight(w: u64) -> Result<Vec<u32>> {
    if w < 2 || w % 2 == 1 {
        return Err(Error::InvalidInput(format!("weight {w} must be even and at least 2")));
    }
    Ok((1..64).filter(|j| (w >> j) & 1 == 1).collect())
}

fn validate_d(d_set: &[u32]) -> Result<()> {
    if d_set.is_empty() {
        return Err(Error::InvalidInput("exponent set is empty".into()));
    }
    if d_set[0] == 0 || d_set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!(
            "exponent set {d_set:?} must be strictly increasing positive integers"
        )));
    }
    if *d_set.last().expect("non-empty") >= 63 {
        return Err(Error::InvalidInput("exponent too large".into()));
    }
    Ok(())
}

/// log₂ sin φ(D) with φ(D) = sin⁻¹(Π_j sin(tan⁻¹(tan^(2^{D_j})(π/8)))).
pub fn log2_sin_phi_of_d(d_set: &[u32]) -> Result<f64> {
    validate_d(d_set)?;
    let lt = FRAC_PI_8.tan().log2();
    Ok(d_set
        .iter()
        .map(|&j| {
            let lx = 2f64.powi(j as i32) * lt;
            // sin(tan⁻¹x) = x/√(1+x²)
            lx - 0.5 * (2.0 * lx).exp2().ln_1p() / LN_2
        })
        .sum())
}

pub fn phi_of_d(d_set: &[u32]) -> Result<Angle> {
    Ok(Angle::asin_of_log2(log2_sin_phi_of_d(d_set)?))
}

#[derive(Clone, Debug, PartialEq)]
pub enum GearboxNode {
    Leaf(GateWord),
    Gearbox(Vec<GearboxNode>),
    Composed(Box<GearboxNode>, u32),
}

impl GearboxNode {
    pub fn leaf(word: &str) -> Result<Self> {
        Ok(GearboxNode::Leaf(GateWord::parse(word)?))
    }

    pub fn composed(base: GearboxNode, d: u32) -> Self {
        GearboxNode::Composed(Box::new(base), d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GearboxNode::Leaf(_) => Ok(()),
            GearboxNode::Gearbox(ch) => {
                if ch.is_empty() {
                    return Err(Error::InvalidInput("gearbox needs at least one child".into()));
                }
                ch.iter().try_for_each(|c| c.validate())
            }
            GearboxNode::Composed(b, d) => {
                if *d == 0 {
                    return Err(Error::InvalidInput("composition depth must be at least 1".into()));
                }
                b.validate()
            }
        }
    }

    /// log₂ of the off-diagonal magnitude of the unitary enacted on success.
    pub fn log2_offdiag(&self) -> Result<f64> {
        match self {
            GearboxNode::Leaf(w) => Ok(w.eval().entry(1, 0).abs().log2()),
            _ => Ok(self.success_angle()?.log2_sin()),
        }
    }

    /// Rotation angle φ of e^{−iφX} enacted on success (gearbox nodes only).
    pub fn success_angle(&self) -> Result<Angle> {
        match self {
            GearboxNode::Leaf(_) => Err(Error::InvalidInput("a leaf is not a rotation about X".into())),
            GearboxNode::Gearbox(_) => gearbox_angle_from_log2_sin_sq(self.input_log2_sin_sq()?),
            GearboxNode::Composed(b, d) => composed_angle(&Angle::asin_of_log2(b.log2_offdiag()?), *d),
        }
    }

    /// log₂ sin²θ of the top-level input angle.
    pub fn input_log2_sin_sq(&self) -> Result<f64> {
        match self {
            GearboxNode::Leaf(_) => Err(Error::InvalidInput("a leaf has no gearbox input angle".into())),
            GearboxNode::Gearbox(ch) => {
                let mut s = 0.0;
                for c in ch {
                    s += 2.0 * c.log2_offdiag()?;
                }
                Ok(s)
            }
            GearboxNode::Composed(b, d) => {
                let theta0 = Angle::asin_of_log2(b.log2_offdiag()?);
                if *d == 1 {
                    return Ok(2.0 * theta0.log2_sin());
                }
                Ok(2.0 * composed_angle(&theta0, d - 1)?.log2_sin())
            }
        }
    }

    /// Top-level success probability of one attempt.
    pub fn success_prob(&self) -> Result<f64> {
        match self {
            GearboxNode::Leaf(_) => Ok(1.0),
            _ => Ok(success_prob_from_sin_sq(self.input_log2_sin_sq()?.exp2())),
        }
    }

    /// T-count of one attempt in which every measurement succeeds:
    /// 4(d−1) + 2Σ T(child); a composed node unrolls to 2^d · T(base).
    pub fn static_tcount(&self) -> u64 {
        match self {
            GearboxNode::Leaf(w) => w.tcount() as u64,
            GearboxNode::Gearbox(ch) => {
                4 * (ch.len() as u64 - 1) + 2 * ch.iter().map(|c| c.static_tcount()).sum::<u64>()
            }
            GearboxNode::Composed(b, d) => (1u64 << d) * b.static_tcount(),
        }
    }

    /// (d−1) + 2 max T-depth(child); a single-qubit word has depth = T-count.
    pub fn static_tdepth(&self) -> u64 {
        match self {
            GearboxNode::Leaf(w) => w.tcount() as u64,
            GearboxNode::Gearbox(ch) => {
                (ch.len() as u64 - 1) + 2 * ch.iter().map(|c| c.static_tdepth()).max().unwrap_or(0)
            }
            GearboxNode::Composed(b, d) => (1u64 << d) * b.static_tdepth(),
        }
    }

    /// Parse `GB(child, ...)`, `C*d(child)`, or a gate word.
    pub fn parse(text: &str) -> Result<GearboxNode> {
        let mut p = NodeParser { s: text.as_bytes(), pos: 0, text };
        let n = p.node()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        n.validate()?;
        Ok(n)
    }
}

impl fmt::Display for GearboxNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GearboxNode::Leaf(w) if w.is_empty() => f.write_str("I"),
            GearboxNode::Leaf(w) => write!(f, "{w}"),
            GearboxNode::Gearbox(ch) => {
                f.write_str("GB(")?;
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            GearboxNode::Composed(b, d) => write!(f, "C*{d}({b})"),
        }
    }
}

struct NodeParser<'a> {
    s: &'a [u8],
    pos: usize,
    text: &'a str,
}

impl NodeParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at position {} in `{}`", self.pos, self.text))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn rest(&self) -> &[u8] {
        &self.s[self.pos..]
    }

    fn node(&mut self) -> Result<GearboxNode> {
        self.skip_ws();
        if self.rest().starts_with(b"GB")
            && self.s[self.pos + 2..].iter().find(|c| !c.is_ascii_whitespace()) == Some(&b'(')
        {
            self.pos += 2;
            self.eat(b'(')?;
            let mut ch = vec![self.node()?];
            loop {
                self.skip_ws();
                match self.s.get(self.pos) {
                    Some(b',') => {
                        self.pos += 1;
                        ch.push(self.node()?);
                    }
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
            return Ok(GearboxNode::Gearbox(ch));
        }
        if self.rest().starts_with(b"C*") {
            self.pos += 2;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let d: u32 = self.text[start..self.pos].parse().map_err(|_| self.err("expected composition depth"))?;
            self.eat(b'(')?;
            let b = self.node()?;
            self.eat(b')')?;
            return Ok(GearboxNode::composed(b, d));
        }
        let start = self.pos;
        while self.pos < self.s.len() && !matches!(self.s[self.pos], b',' | b')' | b'(') {
            self.pos += 1;
        }
        if self.s.get(self.pos) == Some(&b'(') {
            return Err(self.err("unexpected `(`"));
        }
        let leaf = self.text[start..self.pos].trim();
        match leaf {
            "" => Err(self.err("empty leaf (write I for the identity)")),
            "I" => Ok(GearboxNode::Leaf(GateWord::empty())),
            w => Ok(GearboxNode::Leaf(GateWord::parse(w)?)),
        }
    }
}
