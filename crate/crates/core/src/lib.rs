//! Exact search for spherical 4-distance 7-designs.
//!
//! A candidate `(n, M)` is pushed through cheap divisibility sieves, exact
//! integrality of two rational invariants, and finally a certified
//! computation of the distance distribution from the roots of a quartic.

pub mod error;
pub mod exact;
pub mod formulas;
pub mod integrality;
pub mod interval;
pub mod ledger;
pub mod poly;
pub mod record;
pub mod report;
pub mod scan;
pub mod scalar;
pub mod sieve;
pub mod spectrum;

pub use error::{Error, Result};
pub use exact::ExactRational;
pub use formulas::{DerivedQuantities, DesignCandidate, Quartic};

/// Exact rationals; every value is kept in lowest terms.
pub type Rational = num_rational::BigRational;
/// Integer-coefficient polynomials.
pub type IntPoly = poly::Poly<num_bigint::BigInt>;
/// Rational-coefficient polynomials.
pub type RationalPoly = poly::Poly<Rational>;
/// Closed intervals with exact rational endpoints.
pub type CertifiedInterval = interval::Interval<Rational>;
