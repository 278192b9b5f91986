//! Closed intervals over an ordered scalar.
//!
//! Arithmetic is exact in the scalar; callers keep endpoint sizes in check
//! with [`Interval::rounded`], which widens outward onto a binary grid.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::scalar::{OutwardRound, Scalar};

#[derive(Clone, PartialEq)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

fn min2<T: PartialOrd>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

fn max2<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

impl<T: Scalar> Interval<T> {
    /// Panics if `lo > hi`.
    pub fn new(lo: T, hi: T) -> Self {
        assert!(lo <= hi, "inverted interval [{lo:?}, {hi:?}]");
        Interval { lo, hi }
    }

    pub fn point(x: T) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn lo(&self) -> &T {
        &self.lo
    }

    pub fn hi(&self) -> &T {
        &self.hi
    }

    pub fn width(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn contains(&self, x: &T) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&T::zero())
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Every element strictly below every element of `other`.
    pub fn precedes(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.precedes(other) || other.precedes(self)
    }

    pub fn abs(&self) -> Self {
        if self.lo >= T::zero() {
            self.clone()
        } else if self.hi <= T::zero() {
            -self
        } else {
            Interval {
                lo: T::zero(),
                hi: max2(-self.lo.clone(), self.hi.clone()),
            }
        }
    }

    /// `{x^2 : x in self}`, tighter than `self * self` across zero.
    pub fn square(&self) -> Self {
        let a = self.abs();
        Interval {
            lo: a.lo.clone() * a.lo.clone(),
            hi: a.hi.clone() * a.hi,
        }
    }

    /// `None` when the interval contains zero.
    pub fn recip(&self) -> Option<Self> {
        if self.contains_zero() {
            return None;
        }
        Some(Interval {
            lo: T::one() / self.hi.clone(),
            hi: T::one() / self.lo.clone(),
        })
    }

    /// `None` when the divisor contains zero.
    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.contains_zero() {
            return None;
        }
        let products = [
            self.lo.clone() / rhs.lo.clone(),
            self.lo.clone() / rhs.hi.clone(),
            self.hi.clone() / rhs.lo.clone(),
            self.hi.clone() / rhs.hi.clone(),
        ];
        Some(Self::hull_of(products))
    }

    fn hull_of(xs: [T; 4]) -> Self {
        let [a, b, c, d] = xs;
        let lo = min2(min2(a.clone(), b.clone()), min2(c.clone(), d.clone()));
        let hi = max2(max2(a, b), max2(c, d));
        Interval { lo, hi }
    }

    pub fn one() -> Self {
        Self::point(T::one())
    }

    pub fn map_endpoints<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Interval<U> {
        Interval::new(f(&self.lo), f(&self.hi))
    }
}

impl<T: OutwardRound> Interval<T> {
    /// Outward rounding of both endpoints onto the `2^-bits` grid.
    pub fn rounded(&self, bits: u32) -> Self {
        Interval {
            lo: self.lo.round_down(bits),
            hi: self.hi.round_up(bits),
        }
    }
}

impl<T: Scalar> Add for &Interval<T> {
    type Output = Interval<T>;

    fn add(self, rhs: Self) -> Interval<T> {
        Interval {
            lo: self.lo.clone() + rhs.lo.clone(),
            hi: self.hi.clone() + rhs.hi.clone(),
        }
    }
}

impl<T: Scalar> Sub for &Interval<T> {
    type Output = Interval<T>;

    fn sub(self, rhs: Self) -> Interval<T> {
        Interval {
            lo: self.lo.clone() - rhs.hi.clone(),
            hi: self.hi.clone() - rhs.lo.clone(),
        }
    }
}

impl<T: Scalar> Mul for &Interval<T> {
    type Output = Interval<T>;

    fn mul(self, rhs: Self) -> Interval<T> {
        Interval::hull_of([
            self.lo.clone() * rhs.lo.clone(),
            self.lo.clone() * rhs.hi.clone(),
            self.hi.clone() * rhs.lo.clone(),
            self.hi.clone() * rhs.hi.clone(),
        ])
    }
}

impl<T: Scalar> Neg for &Interval<T> {
    type Output = Interval<T>;

    fn neg(self) -> Interval<T> {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }
}

impl<T: Scalar> Zero for Interval<T> {
    fn zero() -> Self {
        Self::point(T::zero())
    }

    fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }
}

impl<T: Scalar> Add for Interval<T> {
    type Output = Interval<T>;

    fn add(self, rhs: Self) -> Interval<T> {
        &self + &rhs
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<T: fmt::Debug> fmt::Debug for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}
