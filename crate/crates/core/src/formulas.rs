//! Closed-form quantities attached to a candidate `(n, M)`: cardinality
//! bounds, the quartic whose roots are the inner products, the reduced
//! discriminant `R(n, M)`, and the exact products `XYZT` and `k_a k_b k_c k_d`.
//!
//! Everything here is exact integer or rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Roots;
use num_traits::{FromPrimitive, Num, Zero};

use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::poly::Poly;

/// A hypothesised design: dimension `n` and cardinality `M`.
///
/// Only non-tight candidates inside the absolute bound can be constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DesignCandidate {
    n: u64,
    m: u64,
}

impl DesignCandidate {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        let (lower, upper) = cardinality_bounds(n)?;
        if m == lower {
            return Err(Error::TightBound { n, m });
        }
        if m < lower {
            return Err(Error::BelowTightBound { n, m, lower });
        }
        if m > upper {
            return Err(Error::AboveAbsoluteBound { n, m, upper });
        }
        Ok(DesignCandidate { n, m })
    }

    /// Skips validation; callers iterating over a known-valid range use this.
    pub(crate) fn new_unchecked(n: u64, m: u64) -> Self {
        debug_assert!(DesignCandidate::new(n, m).is_ok());
        DesignCandidate { n, m }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }
}

/// Largest dimension whose absolute bound still fits in a `u64`.
pub const MAX_DIMENSION: u64 = 100_000;

/// `(2·C(n+2,3), C(n+3,4) + C(n+2,3))`. Valid cardinalities satisfy
/// `lower < M <= upper`.
pub fn cardinality_bounds(n: u64) -> Result<(u64, u64)> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n });
    }
    if n > MAX_DIMENSION {
        return Err(Error::DimensionTooLarge { n });
    }
    let w = n as u128;
    let lower = w * (w + 1) * (w + 2) / 3;
    let upper = w * (w + 1) * (w + 2) * (w + 7) / 24;
    Ok((lower as u64, upper as u64))
}

/// Spherical moments `f_i` of `t^i` for the sphere in dimension `n`.
pub fn moment(i: u32, n: u64) -> Result<ExactRational> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n });
    }
    let n = BigInt::from(n);
    let one = BigInt::from(1);
    let q = |num: i64, den: BigInt| BigRational::new(BigInt::from(num), den);
    Ok(match i {
        0 => q(1, one),
        2 => q(1, n),
        4 => q(3, &n * (&n + 2u32)),
        6 => q(15, &n * (&n + 2u32) * (&n + 4u32)),
        1 | 3 | 5 | 7 => BigRational::zero(),
        _ => return Err(Error::MomentIndex { i }),
    })
}

/// The quartic `c4 t^4 + c3 t^3 + c2 t^2 + c1 t + c0` whose roots are the
/// four inner products of the design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quartic {
    pub c4: BigInt,
    pub c3: BigInt,
    pub c2: BigInt,
    pub c1: BigInt,
    pub c0: BigInt,
}

impl Quartic {
    pub fn from_descending(c: [i64; 5]) -> Self {
        let [c4, c3, c2, c1, c0] = c.map(BigInt::from);
        Quartic { c4, c3, c2, c1, c0 }
    }

    pub fn descending(&self) -> [&BigInt; 5] {
        [&self.c4, &self.c3, &self.c2, &self.c1, &self.c0]
    }

    pub fn to_poly(&self) -> Poly<BigInt> {
        Poly::new(vec![
            self.c0.clone(),
            self.c1.clone(),
            self.c2.clone(),
            self.c3.clone(),
            self.c4.clone(),
        ])
    }

    /// Discriminant `a^6 ∏_{i<j} (r_i - r_j)^2` from the classical closed
    /// form in the coefficients.
    pub fn discriminant(&self) -> BigInt {
        let (a, b, c, d, e) = (&self.c4, &self.c3, &self.c2, &self.c1, &self.c0);
        let p = |k: i64, xs: &[&BigInt]| -> BigInt {
            xs.iter().fold(BigInt::from(k), |acc, x| acc * *x)
        };
        p(256, &[a, a, a, e, e, e]) - p(192, &[a, a, b, d, e, e]) - p(128, &[a, a, c, c, e, e])
            + p(144, &[a, a, c, d, d, e])
            - p(27, &[a, a, d, d, d, d])
            + p(144, &[a, b, b, c, e, e])
            - p(6, &[a, b, b, d, d, e])
            - p(80, &[a, b, c, c, d, e])
            + p(18, &[a, b, c, d, d, d])
            + p(16, &[a, c, c, c, c, e])
            - p(4, &[a, c, c, c, d, d])
            - p(27, &[b, b, b, b, e, e])
            + p(18, &[b, b, b, c, d, e])
            - p(4, &[b, b, b, d, d, d])
            - p(4, &[b, b, c, c, c, e])
            + p(1, &[b, b, c, c, d, d])
    }
}

/// Exact integers derived from a candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedQuantities {
    pub n: u64,
    pub m: u64,
    /// `6M - n(n+1)(n+5)`
    pub a: BigInt,
    /// `3M - n(n+1)(n+2)`
    pub b: BigInt,
    pub quartic: Quartic,
    /// `R(n, M)`
    pub r: BigInt,
}

impl DerivedQuantities {
    /// Evaluates the raw formulas without checking the cardinality range.
    pub fn raw(n: u64, m: u64) -> Self {
        let nb = BigInt::from(n);
        let mb = BigInt::from(m);
        let n1 = &nb + 1u32;
        let n2 = &nb + 2u32;
        let n4 = &nb + 4u32;
        let nm1 = &nb - 1u32;
        let a = &mb * 6 - &nb * &n1 * (&nb + 5u32);
        let b = &mb * 3 - &nb * &n1 * &n2;
        let quartic = Quartic {
            c4: &n2 * &n4 * &a,
            c3: &nb * &nm1 * &n1 * &n2 * &n4,
            c2: BigInt::from(-9) * &n2 * (&mb * 4 - &nb * &n1 * (&nb + 3u32)),
            c1: BigInt::from(-3) * &nb * &nm1 * &n1 * &n2,
            c0: &b * 6,
        };
        let r = ReducedDiscriminant::new(&nb).eval(&mb);
        DerivedQuantities {
            n,
            m,
            a,
            b,
            quartic,
            r,
        }
    }
}

pub fn derived_quantities(c: &DesignCandidate) -> DerivedQuantities {
    DerivedQuantities::raw(c.n, c.m)
}

/// A polynomial factor in `n` (ascending integer coefficients) raised to a power.
struct Factor {
    coeffs: &'static [i64],
    exp: u32,
}

/// One term `± 2^pow2 3^pow3 ∏ factors(n) · M^k` of `R(n, M)`.
struct Term {
    negative: bool,
    pow2: u32,
    pow3: u32,
    factors: &'static [Factor],
}

const N: &[i64] = &[0, 1];
const N_PLUS_1: &[i64] = &[1, 1];
const N_PLUS_2: &[i64] = &[2, 1];
const N_PLUS_3: &[i64] = &[3, 1];
const N_PLUS_5: &[i64] = &[5, 1];
const N_PLUS_7: &[i64] = &[7, 1];
const THREE_N_PLUS_5: &[i64] = &[5, 3];

const fn f(coeffs: &'static [i64], exp: u32) -> Factor {
    Factor { coeffs, exp }
}

/// `R(n, M) = Σ_k coefficient_k(n) M^k`, indexed by `k` (power of `M`).
const R_TERMS: [Term; 7] = [
    // M^0
    Term {
        negative: false,
        pow2: 0,
        pow3: 0,
        factors: &[
            f(N, 6),
            f(N_PLUS_1, 5),
            f(N_PLUS_2, 3),
            f(N_PLUS_5, 3),
            f(N_PLUS_7, 4),
        ],
    },
    // M^1
    Term {
        negative: true,
        pow2: 2,
        pow3: 3,
        factors: &[
            f(N, 5),
            f(N_PLUS_1, 4),
            f(N_PLUS_2, 2),
            f(N_PLUS_5, 2),
            f(N_PLUS_7, 3),
            f(THREE_N_PLUS_5, 1),
        ],
    },
    // M^2
    Term {
        negative: false,
        pow2: 2,
        pow3: 3,
        factors: &[
            f(N, 4),
            f(N_PLUS_1, 3),
            f(N_PLUS_2, 1),
            f(N_PLUS_7, 2),
            f(&[5652, 7873, 3303, 447, 5], 1),
        ],
    },
    // M^3
    Term {
        negative: true,
        pow2: 7,
        pow3: 4,
        factors: &[
            f(N, 3),
            f(N_PLUS_1, 2),
            f(&[9998, 19163, 12782, 3688, 436, 13], 1),
        ],
    },
    // M^4
    Term {
        negative: false,
        pow2: 9,
        pow3: 5,
        factors: &[
            f(N, 2),
            f(N_PLUS_1, 1),
            f(&[818, 1339, 629, 93, 1], 1),
        ],
    },
    // M^5
    Term {
        negative: true,
        pow2: 13,
        pow3: 7,
        factors: &[f(N, 1), f(N_PLUS_1, 1), f(N_PLUS_3, 1)],
    },
    // M^6
    Term {
        negative: false,
        pow2: 14,
        pow3: 6,
        factors: &[],
    },
];

fn eval_factor<T: Clone + Num + FromPrimitive>(coeffs: &[i64], n: &T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| {
        acc * n.clone() + T::from_i64(c).expect("small integer coefficient")
    })
}

fn pow<T: Clone + Num>(x: &T, e: u32) -> T {
    (0..e).fold(T::one(), |acc, _| acc * x.clone())
}

impl Term {
    fn coefficient<T: Clone + Num + FromPrimitive>(&self, n: &T) -> T {
        let two = T::from_u8(2).unwrap();
        let three = T::from_u8(3).unwrap();
        let mut c = pow(&two, self.pow2) * pow(&three, self.pow3);
        for factor in self.factors {
            c = c * pow(&eval_factor(factor.coeffs, n), factor.exp);
        }
        if self.negative {
            T::zero() - c
        } else {
            c
        }
    }
}

/// `R(n, M)` for a fixed dimension, as a degree-6 polynomial in `M`.
///
/// Generic over the integer (or rational) type so the scan can reduce the
/// same coefficients modulo `2^128`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedDiscriminant<T> {
    coeffs: [T; 7],
}

impl<T: Clone + Num + FromPrimitive> ReducedDiscriminant<T> {
    pub fn new(n: &T) -> Self {
        ReducedDiscriminant {
            coeffs: std::array::from_fn(|k| R_TERMS[k].coefficient(n)),
        }
    }

    /// Coefficients of `M^0, …, M^6`.
    pub fn coeffs(&self) -> &[T; 7] {
        &self.coeffs
    }

    /// Horner evaluation in `M`.
    pub fn eval(&self, m: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * m.clone() + c.clone())
    }
}

/// Reference evaluation of `R(n, M)`: every term rebuilt from its printed
/// factors and summed, no Horner nesting.
pub fn reduced_discriminant_term_by_term(n: u64, m: u64) -> BigInt {
    let nb = BigInt::from(n);
    let mb = BigInt::from(m);
    R_TERMS
        .iter()
        .enumerate()
        .map(|(k, term)| term.coefficient(&nb) * mb.pow(k as u32))
        .sum()
}

/// `XYZT = M^3 (n-1)^2 (n+4)^4 A^7 / (54 n^4 (n+1)^2 R(n, M))`.
pub fn xyzt_product(c: &DesignCandidate) -> Result<ExactRational> {
    let q = derived_quantities(c);
    xyzt_from(&q)
}

pub(crate) fn xyzt_from(q: &DerivedQuantities) -> Result<ExactRational> {
    if q.r.is_zero() {
        return Err(Error::SingularDenominator { n: q.n, m: q.m });
    }
    let n = BigInt::from(q.n);
    let m = BigInt::from(q.m);
    let num = m.pow(3)
        * (&n - 1u32).pow(2)
        * (&n + 4u32).pow(4)
        * q.a.pow(7);
    let den = BigInt::from(54) * n.pow(4) * (&n + 1u32).pow(2) * &q.r;
    Ok(BigRational::new(num, den))
}

/// `k_a k_b k_c k_d = 2 M^3 (n+1) (n+4)^2 (n-1)^3 A^3 / R(n, M)`.
pub fn nozaki_product(c: &DesignCandidate) -> Result<ExactRational> {
    let q = derived_quantities(c);
    nozaki_from(&q)
}

pub(crate) fn nozaki_from(q: &DerivedQuantities) -> Result<ExactRational> {
    if q.r.is_zero() {
        return Err(Error::SingularDenominator { n: q.n, m: q.m });
    }
    let n = BigInt::from(q.n);
    let m = BigInt::from(q.m);
    let num = BigInt::from(2)
        * m.pow(3)
        * (&n + 1u32)
        * (&n + 4u32).pow(2)
        * (&n - 1u32).pow(3)
        * q.a.pow(3);
    Ok(BigRational::new(num, q.r.clone()))
}

/// The closed form `D = c4^6 · 108 (n+1)^2 R / ((n+2)^3 (n+4)^5 A^6)`
/// compared, cross-multiplied, against the coefficient discriminant.
pub fn discriminant_identity_check(c: &DesignCandidate) -> bool {
    discriminant_identity_holds(&derived_quantities(c))
}

pub(crate) fn discriminant_identity_holds(q: &DerivedQuantities) -> bool {
    let n = BigInt::from(q.n);
    let lhs = q.quartic.discriminant()
        * (&n + 2u32).pow(3)
        * (&n + 4u32).pow(5)
        * q.a.pow(6);
    let rhs = q.quartic.c4.pow(6) * 108 * (&n + 1u32).pow(2) * &q.r;
    lhs == rhs
}

/// `N = n(n+1)(n+5)/6` and the cap `⌊1/2 + sqrt(N^2/(2N-2) + 1/4)⌋` on
/// `|k_a|, …, |k_d|`, computed in integers.
pub fn nozaki_bound(n: u64) -> u64 {
    let big_n = nozaki_dimension(n) as u128;
    // k is admissible iff (2k-1)^2 (2N-2) <= 4N^2 + 2N - 2.
    let rhs = 4 * big_n * big_n + 2 * big_n - 2;
    let den = 2 * big_n - 2;
    let admissible = |k: u128| {
        let odd = 2 * k - 1;
        odd * odd * den <= rhs
    };
    let mut k = (rhs / den).sqrt() / 2 + 1;
    while k > 1 && !admissible(k) {
        k -= 1;
    }
    while admissible(k + 1) {
        k += 1;
    }
    k as u64
}

/// `N = C(n+2,3) + C(n+1,2)`.
pub fn nozaki_dimension(n: u64) -> u64 {
    n * (n + 1) * (n + 5) / 6
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(n: u64, m: u64) -> DesignCandidate {
        DesignCandidate::new(n, m).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(cardinality_bounds(7).unwrap(), (168, 294));
        assert_eq!(cardinality_bounds(3).unwrap(), (20, 25));
        assert_eq!(cardinality_bounds(8).unwrap(), (240, 450));
        assert!(matches!(
            cardinality_bounds(2),
            Err(Error::DimensionTooSmall { n: 2 })
        ));
    }

    #[test]
    fn bounds_are_binomials() {
        let binom = |a: u64, b: u64| (0..b).fold(1u64, |acc, i| acc * (a - i) / (i + 1));
        for n in 3..200 {
            let (lo, hi) = cardinality_bounds(n).unwrap();
            assert_eq!(lo, 2 * binom(n + 2, 3));
            assert_eq!(hi, binom(n + 3, 4) + binom(n + 2, 3));
            assert!(lo < hi);
        }
    }

    #[test]
    fn candidate_validation() {
        assert!(matches!(
            DesignCandidate::new(8, 240),
            Err(Error::TightBound { n: 8, m: 240 })
        ));
        assert!(matches!(
            DesignCandidate::new(8, 239),
            Err(Error::BelowTightBound { .. })
        ));
        assert!(matches!(
            DesignCandidate::new(8, 451),
            Err(Error::AboveAbsoluteBound { .. })
        ));
        assert!(DesignCandidate::new(8, 450).is_ok());
        assert!(DesignCandidate::new(8, 241).is_ok());
        assert!(matches!(
            DesignCandidate::new(2, 10),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn derived_example_7_196() {
        let d = derived_quantities(&cand(7, 196));
        assert_eq!(d.a, BigInt::from(504));
        assert_eq!(d.b, BigInt::from(84));
        assert_eq!(
            d.quartic,
            Quartic::from_descending([49896, 33264, -18144, -9072, 504])
        );
    }

    #[test]
    fn derived_example_3_21() {
        let d = derived_quantities(&cand(3, 21));
        assert_eq!(d.a, BigInt::from(30));
        assert_eq!(d.b, BigInt::from(3));
        assert_eq!(
            d.quartic,
            Quartic::from_descending([1050, 840, -540, -360, 18])
        );
    }

    #[test]
    fn derived_tight_boundary_raw() {
        let d = DerivedQuantities::raw(8, 240);
        assert!(d.b.is_zero());
        assert!(d.quartic.c0.is_zero());
    }

    #[test]
    fn reduced_discriminant_values() {
        // Frozen from an independent evaluation of the printed polynomial.
        assert_eq!(
            derived_quantities(&cand(7, 196)).r,
            "3331451976494874624".parse::<BigInt>().unwrap()
        );
        assert_eq!(
            derived_quantities(&cand(7, 200)).r,
            "4091579183602335744".parse::<BigInt>().unwrap()
        );
        assert_eq!(derived_quantities(&cand(3, 21)).r, BigInt::from(68199874560i64));
    }

    #[test]
    fn horner_matches_term_by_term() {
        for (n, m) in [(3, 21), (7, 196), (50, 45000), (999, 166_000_000_000)] {
            let h = ReducedDiscriminant::new(&BigInt::from(n)).eval(&BigInt::from(m));
            assert_eq!(h, reduced_discriminant_term_by_term(n, m));
        }
    }

    #[test]
    fn moments() {
        assert_eq!(moment(2, 7).unwrap(), q(1, 7));
        assert_eq!(moment(5, 10).unwrap(), q(0, 1));
        assert_eq!(moment(6, 7).unwrap(), q(5, 231));
        assert_eq!(moment(0, 3).unwrap(), q(1, 1));
        assert_eq!(moment(4, 3).unwrap(), q(1, 5));
        assert!(matches!(moment(8, 7), Err(Error::MomentIndex { i: 8 })));
    }

    #[test]
    fn example_products() {
        let c = cand(7, 196);
        assert_eq!(xyzt_product(&c).unwrap(), q(1185921, 1));
        assert_eq!(nozaki_product(&c).unwrap(), q(121, 1));
    }

    #[test]
    fn non_integer_products_7_200() {
        // Frozen from a direct big-rational evaluation of both formulas.
        let c = cand(7, 200);
        let x = xyzt_product(&c).unwrap();
        assert_eq!(
            x,
            BigRational::new(
                "103749698404000000".parse().unwrap(),
                "73020198811".parse().unwrap()
            )
        );
        let k = nozaki_product(&c).unwrap();
        assert_eq!(
            k,
            BigRational::new("3660250000".parse().unwrap(), "30412411".parse().unwrap())
        );
    }

    #[test]
    fn discriminant_identity_examples() {
        assert!(discriminant_identity_check(&cand(7, 196)));
        assert!(discriminant_identity_check(&cand(3, 21)));
        assert!(discriminant_identity_check(&cand(50, 45000)));
    }

    #[test]
    fn discriminant_identity_detects_wrong_r() {
        let mut q = derived_quantities(&cand(7, 196));
        q.r += 1;
        assert!(!discriminant_identity_holds(&q));
    }

    #[test]
    fn singular_denominator_reported() {
        let mut q = derived_quantities(&cand(7, 196));
        q.r = BigInt::zero();
        assert!(matches!(
            xyzt_from(&q),
            Err(Error::SingularDenominator { n: 7, m: 196 })
        ));
        assert!(matches!(
            nozaki_from(&q),
            Err(Error::SingularDenominator { .. })
        ));
    }

    #[test]
    fn a_and_b_positive_exhaustive() {
        for n in 3..=60 {
            let (lo, hi) = cardinality_bounds(n).unwrap();
            for m in (lo + 1)..=hi {
                let a = 6 * m as i128 - (n * (n + 1) * (n + 5)) as i128;
                let b = 3 * m as i128 - (n * (n + 1) * (n + 2)) as i128;
                assert!(a > 0 && b > 0, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn nozaki_bound_n7() {
        assert_eq!(nozaki_dimension(7), 112);
        assert_eq!(nozaki_bound(7), 8);
        // 8 is the largest k with (k - 1/2)^2 <= 112^2/222 + 1/4.
        let lhs = |k: i64| q((2 * k - 1) * (2 * k - 1), 4);
        let cap = q(112 * 112, 222) + q(1, 4);
        assert!(lhs(8) <= cap);
        assert!(lhs(9) > cap);
    }

    #[test]
    fn nozaki_bound_matches_rational_search() {
        for n in 3..400 {
            let big_n = nozaki_dimension(n) as i64;
            let cap = q(big_n * big_n, 2 * big_n - 2) + q(1, 4);
            let mut k = 1i64;
            while q((2 * k + 1) * (2 * k + 1), 4) <= cap {
                k += 1;
            }
            assert_eq!(nozaki_bound(n), k as u64, "n={n}");
        }
    }
}
