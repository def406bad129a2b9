use std::f64::consts::PI;

use num_complex::Complex64;

use super::ParseError;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Token {
    Num(f64),
    Minus,
    Star,
    Slash,
}

fn malformed(expr: &str) -> ParseError {
    ParseError::MalformedAngle { line: 0, text: expr.to_string() }
}

fn tokenize(expr: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = expr.as_bytes();
    let mut tokens = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        match bytes[k] {
            b' ' | b'\t' => k += 1,
            b'-' => {
                tokens.push(Token::Minus);
                k += 1
            }
            b'*' => {
                tokens.push(Token::Star);
                k += 1
            }
            b'/' => {
                tokens.push(Token::Slash);
                k += 1
            }
            b'p' if expr[k..].starts_with("pi") => {
                tokens.push(Token::Num(PI));
                k += 2
            }
            b'0'..=b'9' | b'.' => {
                let start = k;
                while k < bytes.len() && (bytes[k].is_ascii_digit() || bytes[k] == b'.') {
                    k += 1;
                }
                let lit = &expr[start..k];
                let v: f64 = lit.parse().map_err(|_| malformed(expr))?;
                tokens.push(Token::Num(v));
            }
            _ => return Err(malformed(expr)),
        }
    }
    Ok(tokens)
}

/// Evaluates an angle expression: decimal literals, `pi`, unary minus and
/// left-associative `*` and `/`. Surrounding quotes are optional.
pub fn eval_angle(expr: &str) -> Result<f64, ParseError> {
    let inner = expr.trim();
    let inner = inner
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(inner);
    let tokens = tokenize(inner)?;
    let mut pos = 0;

    let factor = |pos: &mut usize| -> Result<f64, ParseError> {
        let mut negate = false;
        while tokens.get(*pos) == Some(&Token::Minus) {
            negate = !negate;
            *pos += 1;
        }
        match tokens.get(*pos) {
            Some(Token::Num(v)) => {
                *pos += 1;
                Ok(if negate { -v } else { *v })
            }
            _ => Err(malformed(expr)),
        }
    };

    let mut value = factor(&mut pos)?;
    while pos < tokens.len() {
        let op = tokens[pos];
        pos += 1;
        let rhs = factor(&mut pos)?;
        match op {
            Token::Star => value *= rhs,
            Token::Slash => value /= rhs,
            _ => return Err(malformed(expr)),
        }
    }
    if !value.is_finite() {
        return Err(malformed(expr));
    }
    Ok(value)
}

/// Parses a complex literal `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_complex(text: &str) -> Result<Complex64, ParseError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || malformed(text);
    if s.is_empty() {
        return Err(bad());
    }
    let real = |t: &str| -> Result<f64, ParseError> {
        if t.is_empty() || t == "+" || t == "-" {
            return Err(bad());
        }
        t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(real(&s)?, 0.0));
    };
    // Split at the last sign that is not the leading one.
    let split = body
        .char_indices()
        .skip(1)
        .filter(|(_, c)| *c == '+' || *c == '-')
        .map(|(k, _)| k)
        .last();
    let coefficient = |t: &str| -> Result<f64, ParseError> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => real(t),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(real(&body[..k])?, coefficient(&body[k..])?)),
        None => Ok(Complex64::new(0.0, coefficient(body)?)),
    }
}
