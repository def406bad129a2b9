//! High-precision reference values in signed fixed point.

use std::fmt;
use std::str::FromStr;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use super::QfbeError;

/// Working precision in bits; far beyond the widest supported output.
const PRECISION: usize = 192;

/// Results closer than this to a grid point are taken as exactly on it,
/// so `cos(pi/2)` or `log2(8)` do not truncate to the point below.
const SNAP_EXPONENT: i32 = -100;

const MAX_WIDTH: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefFunction {
    /// `log2(x)`
    Log2,
    /// `ln(x)`
    Ln,
    /// `arccos(x)/pi`
    Arccos,
    /// `arcsin(x)/pi`
    Arcsin,
    /// `arccot(x)/pi`, with values in `(0, 1)`
    Arccot,
    /// `arctan(x)/pi`
    Arctan,
    /// `2^x`
    Exp2,
    /// `e^x`
    Exp,
    /// `cos(pi x)`
    Cos,
    /// `sin(pi x)`
    Sin,
    /// `cot(pi x)`
    Cot,
    /// `tan(pi x)`
    Tan,
}

impl RefFunction {
    pub const ALL: [RefFunction; 12] = [
        RefFunction::Log2,
        RefFunction::Ln,
        RefFunction::Arccos,
        RefFunction::Arcsin,
        RefFunction::Arccot,
        RefFunction::Arctan,
        RefFunction::Exp2,
        RefFunction::Exp,
        RefFunction::Cos,
        RefFunction::Sin,
        RefFunction::Cot,
        RefFunction::Tan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RefFunction::Log2 => "log2",
            RefFunction::Ln => "ln",
            RefFunction::Arccos => "arccos",
            RefFunction::Arcsin => "arcsin",
            RefFunction::Arccot => "arccot",
            RefFunction::Arctan => "arctan",
            RefFunction::Exp2 => "exp2",
            RefFunction::Exp => "exp",
            RefFunction::Cos => "cos",
            RefFunction::Sin => "sin",
            RefFunction::Cot => "cot",
            RefFunction::Tan => "tan",
        }
    }
}

impl fmt::Display for RefFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accepts the lowercase names and the uppercase table names
/// (`LOG` is `log2`, `EXP` is `2^x`).
impl FromStr for RefFunction {
    type Err = QfbeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let table = match s {
            "LOG" => Some(RefFunction::Log2),
            "EXP" => Some(RefFunction::Exp2),
            "LN" => Some(RefFunction::Ln),
            _ => None,
        };
        table
            .or_else(|| RefFunction::ALL.into_iter().find(|f| f.name() == s.to_ascii_lowercase()))
            .ok_or_else(|| QfbeError::UnknownFunction(s.to_string()))
    }
}

/// A two's-complement fixed-point value with `int_bits` integer bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPoint {
    /// The value times `2^frac_bits`.
    pub raw: i64,
    pub int_bits: u32,
    pub frac_bits: u32,
}

impl FixedPoint {
    pub fn to_f64(self) -> f64 {
        self.raw as f64 * (-(self.frac_bits as f64)).exp2()
    }
}

/// Renders as `II.FFF`.
impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.int_bits + self.frac_bits;
        let bits = (self.raw as u64) & ((1u64 << width) - 1);
        let s: String = (0..width).rev().map(|k| if bits >> k & 1 == 1 { '1' } else { '0' }).collect();
        let (int, frac) = s.split_at(self.int_bits as usize);
        write!(f, "{int}.{frac}")
    }
}

/// Parses a decimal number or a `0b`-prefixed binary one such as `0b.01` or `-0b1.1`.
pub fn parse_dyadic(text: &str) -> Result<f64, QfbeError> {
    let bad = || QfbeError::MalformedNumber(text.to_string());
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let value = if let Some(bin) = body.strip_prefix("0b") {
        let (int, frac) = bin.split_once('.').unwrap_or((bin, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        let mut v = 0.0f64;
        for ch in int.chars() {
            v = 2.0 * v + ch.to_digit(2).ok_or_else(bad)? as f64;
        }
        let mut scale = 0.5;
        for ch in frac.chars() {
            v += scale * ch.to_digit(2).ok_or_else(bad)? as f64;
            scale /= 2.0;
        }
        v
    } else {
        body.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)?
    };
    Ok(if neg { -value } else { value })
}

fn integer_of(v: &BigFloat) -> i64 {
    // `v` is an integer below 2^63 in magnitude: value = 0.mantissa * 2^e.
    let Some((words, _, sign, exponent, _)) = v.as_raw_parts() else { return 0 };
    if exponent <= 0 || v.is_zero() {
        return 0;
    }
    let top = *words.last().unwrap();
    let magnitude = (top >> (64 - exponent)) as i64;
    if sign == Sign::Neg {
        -magnitude
    } else {
        magnitude
    }
}

fn evaluate(function: RefFunction, x: f64) -> Result<BigFloat, QfbeError> {
    let domain = || QfbeError::DomainError { function: function.name().to_string(), x };
    let p = PRECISION;
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().expect("constant cache");
    let pi = cc.pi(p, rm);
    let bx = BigFloat::from_f64(x, p);
    let pix = bx.mul(&pi, p, rm);
    let one = BigFloat::from_f64(1.0, p);
    let value = match function {
        RefFunction::Log2 | RefFunction::Ln if x <= 0.0 => return Err(domain()),
        RefFunction::Log2 => bx.log2(p, rm, &mut cc),
        RefFunction::Ln => bx.ln(p, rm, &mut cc),
        RefFunction::Arccos | RefFunction::Arcsin if x.abs() > 1.0 => return Err(domain()),
        RefFunction::Arccos => bx.acos(p, rm, &mut cc).div(&pi, p, rm),
        RefFunction::Arcsin => bx.asin(p, rm, &mut cc).div(&pi, p, rm),
        RefFunction::Arctan => bx.atan(p, rm, &mut cc).div(&pi, p, rm),
        RefFunction::Arccot => {
            let half = BigFloat::from_f64(0.5, p);
            half.sub(&bx.atan(p, rm, &mut cc).div(&pi, p, rm), p, rm)
        }
        RefFunction::Exp2 => BigFloat::from_f64(2.0, p).pow(&bx, p, rm, &mut cc),
        RefFunction::Exp => bx.exp(p, rm, &mut cc),
        RefFunction::Cos => pix.cos(p, rm, &mut cc),
        RefFunction::Sin => pix.sin(p, rm, &mut cc),
        RefFunction::Cot if x.fract() == 0.0 => return Err(domain()),
        RefFunction::Cot => one.div(&pix.tan(p, rm, &mut cc), p, rm),
        RefFunction::Tan if (x - 0.5).fract() == 0.0 => return Err(domain()),
        RefFunction::Tan => pix.tan(p, rm, &mut cc),
    };
    if value.is_nan() || value.is_inf() {
        return Err(domain());
    }
    Ok(value)
}

/// `function(x)` truncated toward zero to `frac_bits` fractional bits,
/// as two's complement with `int_bits` integer bits.
///
/// Toward zero is what reproduces `cos(3pi/4) -> 11.011` (-0.625); flooring
/// would give `11.010`.
pub fn reference_value(function: RefFunction, x: f64, int_bits: u32, frac_bits: u32) -> Result<FixedPoint, QfbeError> {
    let width = int_bits + frac_bits;
    if width == 0 || width > MAX_WIDTH {
        return Err(QfbeError::UnsupportedWidth(width));
    }
    let p = PRECISION;
    let rm = RoundingMode::ToEven;
    let value = evaluate(function, x)?;
    let scale = BigFloat::from_f64((frac_bits as f64).exp2(), p);
    let scaled = value.mul(&scale, p, rm);
    let nearest = scaled.round(0, rm);
    let gap = scaled.sub(&nearest, p, rm);
    let on_grid = gap.is_zero() || gap.exponent().is_some_and(|e| e < SNAP_EXPONENT);
    let limit = 1i64 << (width - 1);
    let bound = BigFloat::from_f64(limit as f64, p);
    if scaled.abs_cmp(&bound).is_none_or(|c| c > 0) {
        return Err(QfbeError::Overflow { value: f64::NAN, int_bits });
    }
    let raw = if on_grid { integer_of(&nearest) } else { integer_of(&scaled.int()) };
    if raw >= limit || raw < -limit {
        let approx = raw as f64 * (-(frac_bits as f64)).exp2();
        return Err(QfbeError::Overflow { value: approx, int_bits });
    }
    Ok(FixedPoint { raw, int_bits, frac_bits })
}
