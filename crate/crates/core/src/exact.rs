//! Exact rational helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An exact rational in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

pub fn is_integer(x: &ExactRational) -> bool {
    x.denom().is_one()
}

/// `"num/den"`, or just `"num"` when the denominator is 1.
pub fn to_exact_string(x: &ExactRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses the output of [`to_exact_string`].
pub fn parse_exact(s: &str) -> Option<ExactRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Decimal expansion truncated to `digits` fractional digits, rounded
/// toward `-∞` (`up = false`) or `+∞` (`up = true`).
pub fn to_decimal_directed(x: &ExactRational, digits: u32, up: bool) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = x.numer() * &scale;
    let v = if up {
        scaled.div_ceil(x.denom())
    } else {
        scaled.div_floor(x.denom())
    };
    let neg = v.is_negative();
    let mut s = v.abs().to_string();
    if digits > 0 {
        let width = digits as usize + 1;
        if s.len() < width {
            s = format!("{}{}", "0".repeat(width - s.len()), s);
        }
        s.insert(s.len() - digits as usize, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

pub fn floor(x: &ExactRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &ExactRational) -> BigInt {
    x.numer().div_ceil(x.denom())
}

pub fn from_int(x: impl Into<BigInt>) -> ExactRational {
    BigRational::from_integer(x.into())
}

pub fn one() -> ExactRational {
    BigRational::one()
}
