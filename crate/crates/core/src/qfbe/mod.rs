//! Function-value binary expansion.
//!
//! A function `f: I -> [0, 1)` is expanded digit by digit with two maps:
//! starting from `a_0 = x`, digit `k` is 1 exactly when `a_k` lies in `D_1`,
//! and `a_{k+1} = r_0(a_k)` or `r_1(a_k)` depending on that digit. Then
//! `f(x) = sum of 2^-(k+1)` over the 1-digits. Running the inverse maps from
//! a constant and consuming digits least-significant first evaluates the
//! inverse function.
//!
//! The built-in instance is `arctan(x)/pi` with `r(a) = 2a/(1 - a^2)` on
//! both halves, `D_1 = {a < 0}`, the pole `a = +-1` sent to `-inf` and
//! `r(-inf) = 0`. Reference values for the other tabulated functions come
//! from high-precision floating point in [`reference`].

mod arctan;
mod reference;

use thiserror::Error;

pub use arctan::{arctan_digits, ArctanExact, ArctanFloat, Extended};
pub use reference::{parse_dyadic, reference_value, FixedPoint, RefFunction};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QfbeError {
    #[error("iterate {index} left the domain of the expansion")]
    DomainEscape { index: usize },
    #[error("inverse map for digit {digit} is undefined at step {index}")]
    BranchUndefined { index: usize, digit: u8 },
    #[error("{function} is undefined at {x}")]
    DomainError { function: String, x: f64 },
    #[error("value {value} does not fit in {int_bits} integer bits")]
    Overflow { value: f64, int_bits: u32 },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("malformed number `{0}`")]
    MalformedNumber(String),
    #[error("a fixed-point width of {0} bits is not supported (maximum 62)")]
    UnsupportedWidth(u32),
}

impl QfbeError {
    pub fn class(&self) -> &'static str {
        match self {
            QfbeError::DomainEscape { .. } => "DomainEscape",
            QfbeError::BranchUndefined { .. } => "BranchUndefined",
            QfbeError::DomainError { .. } => "DomainError",
            QfbeError::Overflow { .. } => "Overflow",
            QfbeError::UnknownFunction(_) => "UnknownFunction",
            QfbeError::MalformedNumber(_) => "MalformedNumber",
            QfbeError::UnsupportedWidth(_) => "UnsupportedWidth",
        }
    }
}

/// The two-map recurrence defining an expansion.
pub trait FbeSpec {
    type Value: Clone + std::fmt::Debug;

    /// Membership in the interval `I`; iterates outside it abort the expansion.
    fn in_domain(&self, _a: &Self::Value) -> bool {
        true
    }

    /// True for `D_1`, false for `D_0`.
    fn in_d1(&self, a: &Self::Value) -> bool;

    fn r0(&self, a: &Self::Value) -> Self::Value;

    fn r1(&self, a: &Self::Value) -> Self::Value;
}

/// An expansion whose maps can be inverted branch by branch.
pub trait InverseFbeSpec: FbeSpec {
    fn r0_inv(&self, b: &Self::Value) -> Option<Self::Value>;

    fn r1_inv(&self, b: &Self::Value) -> Option<Self::Value>;
}

/// Iterates `a_0 .. a_n` and the `n` digits they produced.
#[derive(Clone, Debug, PartialEq)]
pub struct FbeTrace<V> {
    pub iterates: Vec<V>,
    pub digits: Vec<u8>,
}

impl<V> FbeTrace<V> {
    /// `sum 2^-(k+1)` over the 1-digits.
    pub fn value(&self) -> f64 {
        self.digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 1)
            .map(|(k, _)| (-(k as f64 + 1.0)).exp2())
            .sum()
    }

    pub fn digit_string(&self) -> String {
        self.digits.iter().map(|d| if *d == 1 { '1' } else { '0' }).collect()
    }
}

pub fn fbe_digits<S: FbeSpec>(spec: &S, x: S::Value, n: usize) -> Result<FbeTrace<S::Value>, QfbeError> {
    let mut iterates = Vec::with_capacity(n + 1);
    let mut digits = Vec::with_capacity(n);
    let mut a = x;
    for k in 0..n {
        if !spec.in_domain(&a) {
            return Err(QfbeError::DomainEscape { index: k });
        }
        let d1 = spec.in_d1(&a);
        digits.push(d1 as u8);
        let next = if d1 { spec.r1(&a) } else { spec.r0(&a) };
        iterates.push(a);
        a = next;
    }
    if !spec.in_domain(&a) {
        return Err(QfbeError::DomainEscape { index: n });
    }
    iterates.push(a);
    Ok(FbeTrace { iterates, digits })
}

/// Runs the inverse maps from `a0`.
///
/// `digits` lists the fractional bits most significant first
/// (`v_{n-1} .. v_0`); they are consumed from the end, `v_0` first, and the
/// final iterate is returned.
pub fn inverse_fbe<S: InverseFbeSpec>(spec: &S, digits: &[u8], a0: S::Value) -> Result<S::Value, QfbeError> {
    let mut a = a0;
    for (index, &digit) in digits.iter().rev().enumerate() {
        let next = if digit == 0 { spec.r0_inv(&a) } else { spec.r1_inv(&a) };
        a = next.ok_or(QfbeError::BranchUndefined { index, digit })?;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Binary expansion of `x` itself: doubling map on `[0, 1)`.
    struct Doubling;

    impl FbeSpec for Doubling {
        type Value = f64;

        fn in_domain(&self, a: &f64) -> bool {
            (0.0..1.0).contains(a)
        }

        fn in_d1(&self, a: &f64) -> bool {
            *a >= 0.5
        }

        fn r0(&self, a: &f64) -> f64 {
            2.0 * a
        }

        fn r1(&self, a: &f64) -> f64 {
            2.0 * a - 1.0
        }
    }

    impl InverseFbeSpec for Doubling {
        fn r0_inv(&self, b: &f64) -> Option<f64> {
            Some(b / 2.0)
        }

        fn r1_inv(&self, b: &f64) -> Option<f64> {
            Some((b + 1.0) / 2.0)
        }
    }

    #[test]
    fn generic_engine_with_identity_expansion() {
        let t = fbe_digits(&Doubling, 0.8125, 6).unwrap();
        assert_eq!(t.digit_string(), "110100");
        assert_eq!(t.value(), 0.8125);
        assert_eq!(inverse_fbe(&Doubling, &t.digits, 0.0).unwrap(), 0.8125);
        assert_eq!(fbe_digits(&Doubling, 1.5, 3), Err(QfbeError::DomainEscape { index: 0 }));
    }
}
