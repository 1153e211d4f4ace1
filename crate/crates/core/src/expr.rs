//! Angle expressions: `0.0123`, `1e-5`, `pi`, `pi/4`, `pi/2^16`, `3*pi/8`,
//! `4.79*10^-5`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!("{what} at position {}", self.pos)))
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9' | b'.')) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a number");
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let d = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            if self.pos == d {
                return self.err("expected an exponent");
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        text.parse::<f64>().or_else(|_| {
            self.pos = start;
            self.err("malformed number")
        })
    }

    fn integer(&mut self) -> Result<i32> {
        let neg = self.eat(b'-');
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        let v: i32 = text.parse().or_else(|_| self.err("integer out of range"))?;
        Ok(if neg { -v } else { v })
    }

    fn pi(&mut self) -> Result<f64> {
        if self.s[self.pos..].starts_with(b"pi") {
            self.pos += 2;
        } else if self.s[self.pos..].starts_with("π".as_bytes()) {
            self.pos += "π".len();
        } else {
            return self.err("expected `pi`");
        }
        if !self.eat(b'/') {
            return Ok(PI);
        }
        let base = self.integer()?;
        if base <= 0 {
            return self.err("divisor must be positive");
        }
        let div = if self.eat(b'^') { (base as f64).powi(self.integer()?) } else { base as f64 };
        Ok(PI / div)
    }
}

/// Parse an angle in radians.
pub fn parse_angle(expr: &str) -> Result<f64> {
    let cleaned: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let mut c = Cursor { s: cleaned.as_bytes(), pos: 0 };
    let neg = c.eat(b'-');
    let v = if c.peek() == Some(b'p') || c.s[c.pos..].starts_with("π".as_bytes()) {
        c.pi()?
    } else {
        let n = c.number()?;
        if c.eat(b'*') {
            if c.s[c.pos..].starts_with(b"10^") {
                c.pos += 3;
                n * 10f64.powi(c.integer()?)
            } else {
                n * c.pi()?
            }
        } else {
            n
        }
    };
    if c.pos != c.s.len() {
        return c.err("unexpected trailing input");
    }
    if !v.is_finite() {
        return Err(Error::Parse(format!("angle `{expr}` is not finite")));
    }
    Ok(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert!((parse_angle("pi/2^16").unwrap() - 4.79369e-5).abs() < 1e-10);
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert!((parse_angle("pi/4").unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((parse_angle("3*pi/8").unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!((parse_angle("4.79*10^-5").unwrap() - 4.79e-5).abs() < 1e-18);
        assert_eq!(parse_angle("1e-200").unwrap(), 1e-200);
        assert_eq!(parse_angle(" 0.5 ").unwrap(), 0.5);
        assert!((parse_angle("π/3").unwrap() - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_angle("pi/x").unwrap_err().to_string();
        assert!(e.contains("position 3"), "{e}");
        assert!(parse_angle("").is_err());
        assert!(parse_angle("1.2.3").is_err());
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("2pi").is_err());
    }
}
