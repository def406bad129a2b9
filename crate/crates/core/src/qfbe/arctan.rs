use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{fbe_digits, FbeSpec, FbeTrace, InverseFbeSpec, QfbeError};

/// A rational iterate or the `-inf` pole sentinel.
#[derive(Clone, Debug, PartialEq)]
pub enum Extended {
    NegInf,
    Finite(BigRational),
}

impl Extended {
    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::NegInf => f64::NEG_INFINITY,
            Extended::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

/// `arctan(x)/pi` over rationals.
///
/// Numerator and denominator double in size at every step, so once an
/// iterate's denominator exceeds `precision_bits` it is rounded to the
/// nearest multiple of `2^-precision_bits`. Iterates with smaller
/// denominators, including every dyadic input of modest size, stay exact.
#[derive(Clone, Debug)]
pub struct ArctanExact {
    pub precision_bits: u64,
}

impl ArctanExact {
    /// Enough working precision for `n` digits: the map at most doubles
    /// angle errors per step.
    pub fn for_digits(n: usize) -> Self {
        Self { precision_bits: 64 + 2 * n as u64 }
    }

    fn round(&self, r: BigRational) -> BigRational {
        if r.denom().bits() <= self.precision_bits {
            return r;
        }
        let scale = BigInt::one() << self.precision_bits;
        let two = BigInt::from(2);
        let num = r.numer() * &scale * &two + r.denom();
        let q = num.div_floor(&(r.denom() * two));
        BigRational::new(q, scale)
    }

    fn step(&self, a: &Extended) -> Extended {
        match a {
            Extended::NegInf => Extended::Finite(BigRational::zero()),
            Extended::Finite(a) => {
                let one = BigRational::one();
                if a.abs() == one {
                    return Extended::NegInf;
                }
                let two = BigRational::from_integer(BigInt::from(2));
                Extended::Finite(self.round(&two * a / (&one - a * a)))
            }
        }
    }
}

impl FbeSpec for ArctanExact {
    type Value = Extended;

    fn in_d1(&self, a: &Extended) -> bool {
        match a {
            Extended::NegInf => true,
            Extended::Finite(r) => r.is_negative(),
        }
    }

    fn r0(&self, a: &Extended) -> Extended {
        self.step(a)
    }

    fn r1(&self, a: &Extended) -> Extended {
        self.step(a)
    }
}

/// The same recurrence in `f64`, with `-inf` as the pole; also invertible.
#[derive(Clone, Copy, Debug, Default)]
pub struct ArctanFloat;

impl ArctanFloat {
    fn step(a: f64) -> f64 {
        if a == f64::NEG_INFINITY {
            0.0
        } else if a.abs() == 1.0 {
            f64::NEG_INFINITY
        } else {
            2.0 * a / (1.0 - a * a)
        }
    }

    /// The two solutions of `2a/(1-a^2) = b`, smaller magnitude first.
    fn roots(b: f64) -> (f64, f64) {
        let s = 1.0 + b.hypot(1.0);
        (b / s, -s / b)
    }
}

impl FbeSpec for ArctanFloat {
    type Value = f64;

    fn in_domain(&self, a: &f64) -> bool {
        !a.is_nan() && *a != f64::INFINITY
    }

    fn in_d1(&self, a: &f64) -> bool {
        *a < 0.0
    }

    fn r0(&self, a: &f64) -> f64 {
        Self::step(*a)
    }

    fn r1(&self, a: &f64) -> f64 {
        Self::step(*a)
    }
}

impl InverseFbeSpec for ArctanFloat {
    /// The non-negative preimage.
    fn r0_inv(&self, b: &f64) -> Option<f64> {
        let b = *b;
        if b == f64::NEG_INFINITY {
            return Some(1.0);
        }
        if b == 0.0 {
            return Some(0.0);
        }
        if !b.is_finite() {
            return None;
        }
        let (small, large) = Self::roots(b);
        Some(if b > 0.0 { small } else { large })
    }

    /// The negative preimage.
    fn r1_inv(&self, b: &f64) -> Option<f64> {
        let b = *b;
        if b == f64::NEG_INFINITY {
            return Some(-1.0);
        }
        if b == 0.0 {
            return Some(f64::NEG_INFINITY);
        }
        if !b.is_finite() {
            return None;
        }
        let (small, large) = Self::roots(b);
        Some(if b > 0.0 { large } else { small })
    }
}

/// Digits of `arctan(x)/pi` for `x >= 0`, iterated over the exact rational value of `x`.
pub fn arctan_digits(x: f64, n: usize) -> Result<FbeTrace<Extended>, QfbeError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(QfbeError::DomainError { function: "arctan".into(), x });
    }
    let start = BigRational::from_float(x).expect("finite input");
    fbe_digits(&ArctanExact::for_digits(n), Extended::Finite(start), n)
}
