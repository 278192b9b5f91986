//! Scalar abstractions shared by the polynomial and interval code.
//!
//! The exact paths run on [`BigInt`] and [`BigRational`]; the same generic
//! code also instantiates over `f64`/`f32` for quick, still outward-rounded,
//! enclosures.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive};

/// A signed ordered ring element usable as a polynomial coefficient or an
/// interval endpoint.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + FromPrimitive {
    fn from_bigint(x: &BigInt) -> Self;

    fn from_rational(x: &BigRational) -> Self;
}

/// Directed rounding onto a binary grid.
///
/// `round_down(x, bits) <= x <= round_up(x, bits)` always holds. For the
/// exact rationals the grid is `2^-bits`; floating types ignore `bits` and
/// step one ulp outward, which turns a round-to-nearest result into a
/// valid bound.
pub trait OutwardRound: Scalar {
    fn round_down(&self, bits: u32) -> Self;

    fn round_up(&self, bits: u32) -> Self;
}

impl Scalar for BigRational {
    fn from_bigint(x: &BigInt) -> Self {
        BigRational::from_integer(x.clone())
    }

    fn from_rational(x: &BigRational) -> Self {
        x.clone()
    }
}

impl OutwardRound for BigRational {
    fn round_down(&self, bits: u32) -> Self {
        if self.denom().is_one() {
            return self.clone();
        }
        let scale = BigInt::one() << bits;
        let scaled = self.numer() * &scale;
        BigRational::new(scaled.div_floor(self.denom()), scale)
    }

    fn round_up(&self, bits: u32) -> Self {
        if self.denom().is_one() {
            return self.clone();
        }
        let scale = BigInt::one() << bits;
        let scaled = self.numer() * &scale;
        BigRational::new(scaled.div_ceil(self.denom()), scale)
    }
}

macro_rules! float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            fn from_bigint(x: &BigInt) -> Self {
                x.to_f64().unwrap_or(f64::NAN) as $f
            }

            fn from_rational(x: &BigRational) -> Self {
                x.to_f64().unwrap_or(f64::NAN) as $f
            }
        }

        impl OutwardRound for $f {
            fn round_down(&self, _bits: u32) -> Self {
                self.next_down()
            }

            fn round_up(&self, _bits: u32) -> Self {
                self.next_up()
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_rounding_brackets_value() {
        let x = q(1, 3);
        let lo = x.round_down(8);
        let hi = x.round_up(8);
        assert!(lo <= x && x <= hi);
        assert_eq!(&hi - &lo, q(1, 256));
        assert_eq!(lo, q(85, 256));
    }

    #[test]
    fn rational_rounding_negative() {
        let x = q(-1, 3);
        assert_eq!(x.round_down(8), q(-86, 256));
        assert_eq!(x.round_up(8), q(-85, 256));
    }

    #[test]
    fn grid_points_are_fixed() {
        let x = q(5, 4);
        assert_eq!(x.round_down(4), x);
        assert_eq!(x.round_up(4), x);
    }

    #[test]
    fn float_rounding_steps_outward() {
        let x = 0.1f64;
        assert!(x.round_down(0) < x && x < x.round_up(0));
    }
}
