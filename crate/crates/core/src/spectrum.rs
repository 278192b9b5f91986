//! Certified roots of the inner-product quartic and the quantities built
//! from them.
//!
//! Roots are isolated with a Sturm sequence on dyadic points of `(-1, 1]`
//! and refined by bisection, so every enclosure has exact endpoints and
//! higher precision only ever shrinks it. The distance distribution and
//! the Nozaki coefficients are then evaluated in interval arithmetic with
//! outward rounding.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{self, ExactRational};
use crate::formulas::{
    derived_quantities, moment, nozaki_bound, nozaki_from, xyzt_from, DerivedQuantities,
    DesignCandidate, Quartic,
};
use crate::interval::Interval;
use crate::poly::{Poly, SturmSequence};
use crate::scalar::OutwardRound;
use crate::{CertifiedInterval, Result};

/// Extra bits carried by interval arithmetic beyond the root precision.
const GUARD_BITS: u32 = 32;

/// Precision schedule and acceptance threshold for integrality decisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub precision_start: u32,
    pub precision_max: u32,
    /// A unique integer in an enclosure narrower than `2^-confirmation_width`
    /// counts as a numerical integer.
    pub confirmation_width: u32,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            precision_start: 128,
            precision_max: 16384,
            confirmation_width: 64,
        }
    }
}

/// The quantities tested for integrality, in the order they are tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    X,
    Y,
    Z,
    T,
    Ka,
    Kb,
    Kc,
    Kd,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::X,
        Quantity::Y,
        Quantity::Z,
        Quantity::T,
        Quantity::Ka,
        Quantity::Kb,
        Quantity::Kc,
        Quantity::Kd,
    ];
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quantity::X => "X",
            Quantity::Y => "Y",
            Quantity::Z => "Z",
            Quantity::T => "T",
            Quantity::Ka => "k_a",
            Quantity::Kb => "k_b",
            Quantity::Kc => "k_c",
            Quantity::Kd => "k_d",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegralityOutcome {
    CertifiedNonInteger,
    NumericallyInteger(BigInt),
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralityVerdict {
    pub outcome: IntegralityOutcome,
    pub precision_used: u32,
}

impl fmt::Display for IntegralityOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegralityOutcome::CertifiedNonInteger => f.write_str("CertifiedNonInteger"),
            IntegralityOutcome::NumericallyInteger(v) => write!(f, "NumericallyInteger({v})"),
            IntegralityOutcome::Undecided => f.write_str("Undecided"),
        }
    }
}

/// Why a candidate cannot be a design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Refutation {
    /// Leading coefficient not positive.
    DegenerateQuartic,
    RepeatedRoot,
    TooFewRealRoots { real_roots: usize },
    /// Fewer than four roots in `[-1, 1)`.
    RootOutOfRange { in_range: usize },
    /// Not `b < 0 < c`.
    SignPattern,
    /// Not `|a| > |d| > |b| > |c|`.
    Ordering,
    NonInteger { quantity: Quantity },
    /// `X..T` must be positive.
    NotPositive { quantity: Quantity },
    /// `|k| <= bound` fails for every integer in the enclosure.
    OutOfBound { quantity: Quantity, bound: u64 },
}

impl fmt::Display for Refutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Refutation::DegenerateQuartic => f.write_str("quartic: leading coefficient not positive"),
            Refutation::RepeatedRoot => f.write_str("quartic: repeated root"),
            Refutation::TooFewRealRoots { real_roots } => {
                write!(f, "quartic: only {real_roots} real roots")
            }
            Refutation::RootOutOfRange { in_range } => {
                write!(f, "quartic: only {in_range} roots in [-1, 1)")
            }
            Refutation::SignPattern => f.write_str("spectrum: b < 0 < c fails"),
            Refutation::Ordering => f.write_str("spectrum: |a| > |d| > |b| > |c| fails"),
            Refutation::NonInteger { quantity } => write!(f, "{quantity}: certified non-integer"),
            Refutation::NotPositive { quantity } => write!(f, "{quantity}: not a positive integer"),
            Refutation::OutOfBound { quantity, bound } => {
                write!(f, "{quantity}: no integer with |k| <= {bound}")
            }
        }
    }
}

/// Certified enclosures of the four roots `a < b < c < d`.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProductSpectrum {
    roots: [CertifiedInterval; 4],
    precision: u32,
}

impl InnerProductSpectrum {
    pub fn roots(&self) -> &[CertifiedInterval; 4] {
        &self.roots
    }

    pub fn a(&self) -> &CertifiedInterval {
        &self.roots[0]
    }

    pub fn b(&self) -> &CertifiedInterval {
        &self.roots[1]
    }

    pub fn c(&self) -> &CertifiedInterval {
        &self.roots[2]
    }

    pub fn d(&self) -> &CertifiedInterval {
        &self.roots[3]
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }
}

/// Point counts `X, Y, Z, T` at inner products `a, b, c, d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceDistribution {
    pub values: [CertifiedInterval; 4],
    pub exact_product: ExactRational,
    /// Grid used for outward rounding.
    pub bits: u32,
}

/// `k_a, k_b, k_c, k_d` with their exact product and the cap on `|k|`.
#[derive(Clone, Debug, PartialEq)]
pub struct NozakiCoefficients {
    pub values: [CertifiedInterval; 4],
    pub exact_product: ExactRational,
    pub bound: u64,
    pub bits: u32,
}

fn product<T: OutwardRound>(xs: &[Interval<T>], bits: u32) -> Interval<T> {
    xs.iter()
        .fold(Interval::one(), |acc, x| (&acc * x).rounded(bits))
}

fn sum<T: OutwardRound>(xs: &[Interval<T>]) -> Interval<T> {
    xs.iter().fold(Interval::zero(), |acc, x| &acc + x)
}

impl DistanceDistribution {
    pub fn product(&self) -> CertifiedInterval {
        product(&self.values, self.bits)
    }

    pub fn sum(&self) -> CertifiedInterval {
        sum(&self.values)
    }

    /// `Σ r^(2j) · count` over the four inner products, which must equal
    /// `f_{2j} M - 1`.
    pub fn moment_sum(&self, spectrum: &InnerProductSpectrum, j: u32) -> CertifiedInterval {
        let bits = spectrum.precision + GUARD_BITS;
        let terms: Vec<_> = spectrum
            .roots
            .iter()
            .zip(&self.values)
            .map(|(r, v)| {
                let mut p = Interval::one();
                for _ in 0..j {
                    p = (&p * &r.square()).rounded(bits);
                }
                (&p * v).rounded(bits)
            })
            .collect();
        sum(&terms)
    }

    /// Checks the even moment equations `i = 0, 2, 4, 6` on the enclosures.
    pub fn moment_identities_hold(&self, spectrum: &InnerProductSpectrum, n: u64, m: u64) -> bool {
        (0..4).all(|j| {
            let f = moment(2 * j, n).expect("valid dimension");
            let target = f * exact::from_int(m) - exact::one();
            self.moment_sum(spectrum, j).contains(&target)
        })
    }
}

impl NozakiCoefficients {
    pub fn product(&self) -> CertifiedInterval {
        product(&self.values, self.bits)
    }

    pub fn sum(&self) -> CertifiedInterval {
        sum(&self.values)
    }
}

/// `num / 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    fn int(x: i64) -> Self {
        Dyadic {
            num: BigInt::from(x),
            exp: 0,
        }
    }

    fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    fn with_exp(&self, exp: u32) -> BigInt {
        &self.num << (exp - self.exp)
    }

    fn midpoint(&self, other: &Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp) + 1;
        let num = self.with_exp(exp - 1) + other.with_exp(exp - 1);
        Dyadic { num, exp }.normalized()
    }

    fn normalized(mut self) -> Self {
        while self.exp > 0 && self.num.is_even() {
            self.num >>= 1;
            self.exp -= 1;
        }
        self
    }
}

/// Sign of `f(x)` at a dyadic point, in integer arithmetic.
fn sign_at(f: &Poly<BigInt>, x: &Dyadic) -> i32 {
    let deg = f.degree().unwrap_or(0) as u32;
    let mut acc = BigInt::zero();
    let mut pow_num = BigInt::one();
    for (i, c) in f.coeffs().iter().enumerate() {
        acc += c * &pow_num << (x.exp * (deg - i as u32));
        pow_num *= &x.num;
    }
    match acc.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

/// A root known to lie in `[lo, hi]`; `exact` means `lo = hi` is the root.
#[derive(Clone, Debug)]
struct Bracket {
    lo: Dyadic,
    hi: Dyadic,
    /// Sign of `f` at `hi`, zero when `hi` is the root.
    hi_sign: i32,
}

impl Bracket {
    fn is_exact(&self) -> bool {
        self.hi_sign == 0
    }

    fn width_at_most(&self, bits: u32) -> bool {
        if self.is_exact() {
            return true;
        }
        let exp = self.lo.exp.max(self.hi.exp);
        let w = self.hi.with_exp(exp) - self.lo.with_exp(exp);
        // w / 2^exp <= 2^-bits
        if exp < bits {
            return false;
        }
        w <= BigInt::one() << (exp - bits)
    }

    fn bisect(&mut self, f: &Poly<BigInt>) {
        if self.is_exact() {
            return;
        }
        let mid = self.lo.midpoint(&self.hi);
        let s = sign_at(f, &mid);
        if s == 0 {
            self.lo = mid.clone();
            self.hi = mid;
            self.hi_sign = 0;
        } else if s == self.hi_sign {
            self.hi = mid;
        } else {
            self.lo = mid;
        }
    }

    fn enclosure(&self) -> CertifiedInterval {
        if self.is_exact() {
            Interval::point(self.hi.to_rational())
        } else {
            Interval::new(self.lo.to_rational(), self.hi.to_rational())
        }
    }
}

struct Isolator<'a> {
    f: &'a Poly<BigInt>,
    sturm: &'a SturmSequence<BigRational>,
}

impl Isolator<'_> {
    fn variations(&self, x: &Dyadic) -> usize {
        self.sturm.variations(&x.to_rational())
    }

    /// Isolating brackets for the roots in `(lo, hi]`, ascending.
    fn split(&self, lo: Dyadic, vlo: usize, hi: Dyadic, vhi: usize, out: &mut Vec<Bracket>) {
        let count = vlo - vhi;
        if count == 0 {
            return;
        }
        if count == 1 {
            let hi_sign = sign_at(self.f, &hi);
            let lo = if hi_sign == 0 { hi.clone() } else { lo };
            out.push(Bracket { lo, hi, hi_sign });
            return;
        }
        let mid = lo.midpoint(&hi);
        let vmid = self.variations(&mid);
        self.split(lo, vlo, mid.clone(), vmid, out);
        self.split(mid, vmid, hi, vhi, out);
    }
}

fn abs_disjoint(x: &CertifiedInterval, y: &CertifiedInterval) -> bool {
    x.abs().is_disjoint(&y.abs())
}

/// Roots of the quartic of `q`, each enclosed to width `2^-precision`.
pub fn solve_quartic(
    q: &DerivedQuantities,
    precision: u32,
) -> std::result::Result<InnerProductSpectrum, Refutation> {
    solve_quartic_poly(&q.quartic, precision)
}

/// [`solve_quartic`] for an arbitrary integer quartic.
pub fn solve_quartic_poly(
    quartic: &Quartic,
    precision: u32,
) -> std::result::Result<InnerProductSpectrum, Refutation> {
    if !quartic.c4.is_positive() {
        return Err(Refutation::DegenerateQuartic);
    }
    let f = quartic.to_poly();
    let fq = f.map(|c| BigRational::from_integer(c.clone()));
    let sturm = fq.sturm_sequence();
    if !sturm.is_squarefree() {
        return Err(Refutation::RepeatedRoot);
    }
    let real_roots = sturm.count_real_roots();
    if real_roots < 4 {
        return Err(Refutation::TooFewRealRoots { real_roots });
    }
    let iso = Isolator { f: &f, sturm: &sturm };
    let (minus_one, one) = (Dyadic::int(-1), Dyadic::int(1));
    let (vlo, vhi) = (iso.variations(&minus_one), iso.variations(&one));
    let mut brackets = Vec::with_capacity(4);
    if sign_at(&f, &minus_one) == 0 {
        brackets.push(Bracket {
            lo: minus_one.clone(),
            hi: minus_one.clone(),
            hi_sign: 0,
        });
    }
    iso.split(minus_one, vlo, one, vhi, &mut brackets);
    brackets.retain(|b| !(b.is_exact() && b.hi == Dyadic::int(1)));
    if brackets.len() < 4 {
        return Err(Refutation::RootOutOfRange {
            in_range: brackets.len(),
        });
    }
    // Exactly two roots below zero, and zero itself not a root.
    let zero = Dyadic::int(0);
    let negative = brackets
        .iter()
        .filter(|b| b.hi.num.is_negative() || (b.hi.num.is_zero() && !b.is_exact()))
        .count();
    if sign_at(&f, &zero) == 0 || negative != 2 {
        return Err(Refutation::SignPattern);
    }
    for b in &mut brackets {
        while !b.width_at_most(precision) {
            b.bisect(&f);
        }
    }
    // Two roots of equal absolute value are common roots of f(t), f(-t).
    if fq.gcd(&fq.reflect()).degree().unwrap_or(0) > 0 {
        return Err(Refutation::Ordering);
    }
    loop {
        let enc: Vec<_> = brackets.iter().map(Bracket::enclosure).collect();
        let mut clashing = vec![false; 4];
        for i in 0..4 {
            for j in i + 1..4 {
                if !abs_disjoint(&enc[i], &enc[j]) {
                    clashing[i] = true;
                    clashing[j] = true;
                }
            }
        }
        if !clashing.contains(&true) {
            break;
        }
        for (b, clash) in brackets.iter_mut().zip(clashing) {
            if clash {
                b.bisect(&f);
            }
        }
    }
    let roots: [CertifiedInterval; 4] = std::array::from_fn(|i| brackets[i].enclosure());
    let [a, b, c, d] = roots.each_ref().map(Interval::abs);
    let gt = |x: &CertifiedInterval, y: &CertifiedInterval| y.precedes(x);
    if !(gt(&a, &d) && gt(&d, &b) && gt(&b, &c)) {
        return Err(Refutation::Ordering);
    }
    Ok(InnerProductSpectrum { roots, precision })
}

/// `X..T` from enclosures of `a..d`: for the root `r_i`,
/// `-∏_{j≠i} (1 - r_j^2) / (r_i ∏_{j≠i} (r_i^2 - r_j^2))`. `None` if a
/// denominator enclosure contains zero.
pub fn distance_values<T: OutwardRound>(roots: &[Interval<T>; 4], bits: u32) -> Option<[Interval<T>; 4]> {
    let squares: Vec<_> = roots.iter().map(|r| r.square().rounded(bits)).collect();
    let one = Interval::<T>::one();
    let mut out = Vec::with_capacity(4);
    for i in 0..4 {
        let mut num = one.clone();
        let mut den = roots[i].clone();
        for j in (0..4).filter(|&j| j != i) {
            num = (&num * &(&one - &squares[j])).rounded(bits);
            den = (&den * &(&squares[i] - &squares[j])).rounded(bits);
        }
        out.push((-&num).checked_div(&den)?.rounded(bits));
    }
    out.try_into().ok()
}

/// `k_a..k_d`: for the root `r_i`, `∏_{j≠i} (1 - r_j) / ∏_{j≠i} (r_i - r_j)`.
pub fn nozaki_values<T: OutwardRound>(roots: &[Interval<T>; 4], bits: u32) -> Option<[Interval<T>; 4]> {
    let one = Interval::<T>::one();
    let mut out = Vec::with_capacity(4);
    for i in 0..4 {
        let mut num = one.clone();
        let mut den = one.clone();
        for j in (0..4).filter(|&j| j != i) {
            num = (&num * &(&one - &roots[j])).rounded(bits);
            den = (&den * &(&roots[i] - &roots[j])).rounded(bits);
        }
        out.push(num.checked_div(&den)?.rounded(bits));
    }
    out.try_into().ok()
}

/// `None` asks for more precision.
pub fn distance_distribution(
    s: &InnerProductSpectrum,
    c: &DesignCandidate,
) -> Result<Option<DistanceDistribution>> {
    let exact_product = xyzt_from(&derived_quantities(c))?;
    let bits = s.precision + GUARD_BITS;
    Ok(distance_values(&s.roots, bits).map(|values| DistanceDistribution {
        values,
        exact_product,
        bits,
    }))
}

/// `None` asks for more precision.
pub fn nozaki_coefficients(
    s: &InnerProductSpectrum,
    c: &DesignCandidate,
) -> Result<Option<NozakiCoefficients>> {
    let exact_product = nozaki_from(&derived_quantities(c))?;
    let bound = nozaki_bound(c.n());
    let bits = s.precision + GUARD_BITS;
    Ok(nozaki_values(&s.roots, bits).map(|values| NozakiCoefficients {
        values,
        exact_product,
        bound,
        bits,
    }))
}

/// Integers `lo..=hi` inside the enclosure.
fn integer_span(e: &CertifiedInterval) -> (BigInt, BigInt) {
    (exact::ceil(e.lo()), exact::floor(e.hi()))
}

pub fn integrality_test(e: &CertifiedInterval, policy: &Policy, precision_used: u32) -> IntegralityVerdict {
    let (lo, hi) = integer_span(e);
    let outcome = if lo > hi {
        IntegralityOutcome::CertifiedNonInteger
    } else if lo == hi && width_below(e, policy.confirmation_width) {
        IntegralityOutcome::NumericallyInteger(lo)
    } else {
        IntegralityOutcome::Undecided
    };
    IntegralityVerdict {
        outcome,
        precision_used,
    }
}

fn width_below(e: &CertifiedInterval, bits: u32) -> bool {
    let w = e.width();
    w * (BigInt::one() << bits) <= BigRational::one()
}

/// Whether some integer in the enclosure lies in `range` (inclusive).
fn admits_integer_in(e: &CertifiedInterval, min: Option<&BigInt>, max: Option<&BigInt>) -> bool {
    let (mut lo, mut hi) = integer_span(e);
    if let Some(min) = min {
        lo = lo.max(min.clone());
    }
    if let Some(max) = max {
        hi = hi.min(max.clone());
    }
    lo <= hi
}

/// Do four integers with `|k| <= bound` sum to 1 and multiply to `product`?
pub fn k_factorization_feasible(product: &BigInt, bound: u64) -> bool {
    if product.is_zero() {
        return true;
    }
    let b = bound as i128;
    let limit = BigInt::from(bound).pow(4);
    if product.abs() > limit {
        return false;
    }
    let p = product.to_i128().expect("bounded by bound^4");
    let mut divisors: Vec<i128> = (1..=b).filter(|d| p % d == 0).flat_map(|d| [-d, d]).collect();
    divisors.sort_unstable();
    for (i, &k1) in divisors.iter().enumerate() {
        for (j, &k2) in divisors.iter().enumerate().skip(i) {
            let p12 = k1 * k2;
            if p % p12 != 0 {
                continue;
            }
            for &k3 in &divisors[j..] {
                let p123 = p12 * k3;
                if p % p123 != 0 {
                    continue;
                }
                let k4 = p / p123;
                if k4 >= k3 && k4.abs() <= b && k1 + k2 + k3 + k4 == 1 {
                    return true;
                }
            }
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnalysisOutcome {
    Refuted(Refutation),
    /// No refutation; every quantity looks like an admissible integer and
    /// needs exact algebraic confirmation.
    NumericalSurvivor,
    /// Precision ran out before a decision.
    Undecided,
}

/// Everything computed for one candidate by [`full_candidate_analysis`].
#[derive(Clone, Debug)]
pub struct SpectrumAnalysis {
    pub outcome: AnalysisOutcome,
    pub precision_bits: u32,
    pub spectrum: Option<InnerProductSpectrum>,
    pub distances: Option<DistanceDistribution>,
    pub nozaki: Option<NozakiCoefficients>,
    /// One verdict per tested quantity, up to the first refutation.
    pub verdicts: Vec<(Quantity, IntegralityVerdict)>,
}

impl SpectrumAnalysis {
    pub fn refutation(&self) -> Option<&Refutation> {
        match &self.outcome {
            AnalysisOutcome::Refuted(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_survivor(&self) -> bool {
        self.refutation().is_none()
    }
}

/// Roots, `X..T`, `k_a..k_d` and their integrality, escalating precision
/// until a certified refutation or the policy's maximum.
pub fn full_candidate_analysis(c: &DesignCandidate, policy: &Policy) -> Result<SpectrumAnalysis> {
    let q = derived_quantities(c);
    let mut precision = policy.precision_start.max(1);
    let mut last = None;
    while precision <= policy.precision_max {
        let spectrum = match solve_quartic(&q, precision) {
            Ok(s) => s,
            Err(r) => {
                return Ok(SpectrumAnalysis {
                    outcome: AnalysisOutcome::Refuted(r),
                    precision_bits: precision,
                    spectrum: None,
                    distances: None,
                    nozaki: None,
                    verdicts: Vec::new(),
                })
            }
        };
        let (Some(distances), Some(nozaki)) = (
            distance_distribution(&spectrum, c)?,
            nozaki_coefficients(&spectrum, c)?,
        ) else {
            log::debug!("n={} M={}: denominator straddles zero at {precision} bits", c.n(), c.m());
            precision = precision.saturating_mul(2);
            continue;
        };
        let analysis = decide(spectrum, distances, nozaki, policy, precision);
        if analysis.outcome != AnalysisOutcome::Undecided {
            return Ok(analysis);
        }
        log::debug!("n={} M={}: undecided at {precision} bits", c.n(), c.m());
        last = Some(analysis);
        precision = precision.saturating_mul(2);
    }
    Ok(last.unwrap_or(SpectrumAnalysis {
        outcome: AnalysisOutcome::Undecided,
        precision_bits: policy.precision_max,
        spectrum: None,
        distances: None,
        nozaki: None,
        verdicts: Vec::new(),
    }))
}

fn decide(
    spectrum: InnerProductSpectrum,
    distances: DistanceDistribution,
    nozaki: NozakiCoefficients,
    policy: &Policy,
    precision: u32,
) -> SpectrumAnalysis {
    let one = BigInt::one();
    let bound = BigInt::from(nozaki.bound);
    let neg_bound = -bound.clone();
    let mut verdicts = Vec::new();
    let mut outcome = AnalysisOutcome::NumericalSurvivor;
    let enclosures = distances.values.iter().chain(nozaki.values.iter());
    for (quantity, e) in Quantity::ALL.into_iter().zip(enclosures) {
        let verdict = integrality_test(e, policy, precision);
        let is_count = matches!(quantity, Quantity::X | Quantity::Y | Quantity::Z | Quantity::T);
        let refutation = if verdict.outcome == IntegralityOutcome::CertifiedNonInteger {
            Some(Refutation::NonInteger { quantity })
        } else if is_count && !admits_integer_in(e, Some(&one), None) {
            Some(Refutation::NotPositive { quantity })
        } else if !is_count && !admits_integer_in(e, Some(&neg_bound), Some(&bound)) {
            Some(Refutation::OutOfBound {
                quantity,
                bound: nozaki.bound,
            })
        } else {
            None
        };
        if verdict.outcome == IntegralityOutcome::Undecided && refutation.is_none() {
            outcome = AnalysisOutcome::Undecided;
        }
        verdicts.push((quantity, verdict));
        if let Some(r) = refutation {
            outcome = AnalysisOutcome::Refuted(r);
            break;
        }
    }
    SpectrumAnalysis {
        outcome,
        precision_bits: precision,
        spectrum: Some(spectrum),
        distances: Some(distances),
        nozaki: Some(nozaki),
        verdicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::is_integer;
    use crate::formulas::{cardinality_bounds, nozaki_product, xyzt_product};
    use crate::integrality::DimensionIntegrality;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn approx(e: &CertifiedInterval) -> f64 {
        e.lo().to_f64().unwrap()
    }

    fn cand(n: u64, m: u64) -> DesignCandidate {
        DesignCandidate::new(n, m).unwrap()
    }

    #[test]
    fn example_7_196_roots() {
        let s = solve_quartic(&DerivedQuantities::raw(7, 196), 64).unwrap();
        let expected = [-0.821721, -0.442124, 0.0508952, 0.546284];
        for (r, x) in s.roots().iter().zip(expected) {
            assert!((approx(r) - x).abs() < 1e-6, "{r} vs {x}");
            assert!(r.width() <= q(1, 1) / BigRational::from_integer(BigInt::one() << 64u32));
        }
    }

    #[test]
    fn example_7_196_values() {
        let c = cand(7, 196);
        let s = solve_quartic(&derived_quantities(&c), 128).unwrap();
        let dd = distance_distribution(&s, &c).unwrap().unwrap();
        let got: Vec<f64> = dd.values.iter().map(approx).collect();
        // Counts at a, b, c, d in that order.
        for (g, x) in got.iter().zip([5.6305, 53.955, 93.844, 41.570]) {
            assert!((g - x).abs() < 1e-2, "{got:?}");
        }
        assert!(dd.sum().contains(&BigRational::from_integer(195.into())));
        assert!(dd.product().contains(&BigRational::from_integer(1185921.into())));
        assert!(dd.moment_identities_hold(&s, 7, 196));
        let k = nozaki_coefficients(&s, &c).unwrap().unwrap();
        assert_eq!(k.bound, 8);
        assert!(k.sum().contains(&BigRational::one()));
        assert!(k.product().contains(&BigRational::from_integer(121.into())));
    }

    #[test]
    fn e8_kissing_quartic_has_exact_roots_and_is_refuted() {
        let q8 = DerivedQuantities::raw(8, 240);
        assert_eq!(
            q8.quartic,
            Quartic::from_descending([60480, 60480, -15120, -15120, 0])
        );
        let f = q8.quartic.to_poly();
        for (num, exp) in [(-1, 0), (-1, 1), (0, 0), (1, 1)] {
            let x = Dyadic {
                num: BigInt::from(num),
                exp,
            };
            assert_eq!(sign_at(&f, &x), 0);
        }
        assert_eq!(solve_quartic(&q8, 64), Err(Refutation::SignPattern));
    }

    #[test]
    fn double_root_is_refuted() {
        // (2t - 1)^2 (2t + 1) (4t + 1)
        let f = Quartic::from_descending([32, -8, -12, 2, 1]);
        assert_eq!(solve_quartic_poly(&f, 64), Err(Refutation::RepeatedRoot));
    }

    #[test]
    fn structural_refutations() {
        // t^4 + 1 has no real roots.
        let f = Quartic::from_descending([1, 0, 0, 0, 1]);
        assert_eq!(
            solve_quartic_poly(&f, 64),
            Err(Refutation::TooFewRealRoots { real_roots: 0 })
        );
        // Roots ±2, ±1/2: two outside [-1, 1).
        let f = Quartic::from_descending([4, 0, -17, 0, 4]);
        assert_eq!(
            solve_quartic_poly(&f, 64),
            Err(Refutation::RootOutOfRange { in_range: 2 })
        );
        // Roots -3/4, -1/2, -1/4, 1/2: three negative.
        let f = Quartic::from_descending([128, 128, -8, -32, -6]);
        assert_eq!(solve_quartic_poly(&f, 64), Err(Refutation::SignPattern));
        // Roots -1/2, -1/4, 1/8, 3/4: |d| > |a|.
        let f = Quartic::from_descending([256, -32, -112, -10, 3]);
        assert_eq!(solve_quartic_poly(&f, 64), Err(Refutation::Ordering));
        // Roots -3/4, -1/2, 1/4, 1/2: |b| = |d|.
        let f = Quartic::from_descending([64, 32, -28, -8, 3]);
        assert_eq!(solve_quartic_poly(&f, 64), Err(Refutation::Ordering));
        let f = Quartic::from_descending([0, 1, 0, 0, 1]);
        assert_eq!(solve_quartic_poly(&f, 64), Err(Refutation::DegenerateQuartic));
    }

    #[test]
    fn root_at_minus_one_is_kept() {
        // Roots -1, -1/4, 1/8, 1/2: ordering |a| > |d| > |b| > |c| holds.
        let f = Quartic::from_descending([64, 40, -30, -5, 1]);
        let s = solve_quartic_poly(&f, 32).unwrap();
        assert_eq!(s.a(), &Interval::point(q(-1, 1)));
        assert_eq!(s.d(), &Interval::point(q(1, 2)));
    }

    #[test]
    fn integrality_examples() {
        let policy = Policy {
            confirmation_width: 12,
            ..Policy::default()
        };
        let verdict = |lo: BigRational, hi: BigRational| {
            integrality_test(&Interval::new(lo, hi), &policy, 128).outcome
        };
        assert_eq!(verdict(q(562, 100), q(564, 100)), IntegralityOutcome::CertifiedNonInteger);
        assert_eq!(
            verdict(q(1209999, 10000), q(1210001, 10000)),
            IntegralityOutcome::NumericallyInteger(121.into())
        );
        assert_eq!(verdict(q(54, 10), q(66, 10)), IntegralityOutcome::Undecided);
        // Unique integer, but too wide at the default width.
        let strict = integrality_test(
            &Interval::new(q(1209999, 10000), q(1210001, 10000)),
            &Policy::default(),
            128,
        );
        assert_eq!(strict.outcome, IntegralityOutcome::Undecided);
    }

    #[test]
    fn full_analysis_of_example_refutes_on_x() {
        let a = full_candidate_analysis(&cand(7, 196), &Policy::default()).unwrap();
        assert_eq!(
            a.outcome,
            AnalysisOutcome::Refuted(Refutation::NonInteger {
                quantity: Quantity::X
            })
        );
        assert_eq!(a.precision_bits, 128);
        assert_eq!(a.verdicts.len(), 1);
    }

    #[test]
    fn k_factorization() {
        assert!(!k_factorization_feasible(&BigInt::from(121), 8));
        // 2 * 2 * (-1) * (-2) = 8 and 2 + 2 - 1 - 2 = 1.
        assert!(k_factorization_feasible(&BigInt::from(8), 2));
        assert!(!k_factorization_feasible(&BigInt::from(8), 1));
        assert!(k_factorization_feasible(&BigInt::zero(), 1));
        assert!(!k_factorization_feasible(&BigInt::from(17), 100));
        // 1 + 1 + 1 - 2 = 1, product -2.
        assert!(k_factorization_feasible(&BigInt::from(-2), 2));
        assert!(!k_factorization_feasible(&BigInt::from(1000), 3));
    }

    #[test]
    fn k_factorization_matches_brute_force() {
        for b in 1..=4i64 {
            let mut products = std::collections::HashSet::new();
            for k1 in -b..=b {
                for k2 in -b..=b {
                    for k3 in -b..=b {
                        let k4 = 1 - k1 - k2 - k3;
                        if k4.abs() <= b {
                            products.insert(k1 * k2 * k3 * k4);
                        }
                    }
                }
            }
            for p in -300..=300 {
                assert_eq!(
                    k_factorization_feasible(&BigInt::from(p), b as u64),
                    products.contains(&p),
                    "p={p} b={b}"
                );
            }
        }
    }

    #[test]
    fn generic_over_floats() {
        let c = cand(7, 196);
        let s = solve_quartic(&derived_quantities(&c), 64).unwrap();
        let roots = s.roots().clone().map(|r| {
            r.map_endpoints(|x| x.to_f64().unwrap()).rounded(0)
        });
        let v = distance_values(&roots, 0).unwrap();
        let exact = distance_values(s.roots(), 96).unwrap();
        for (f, e) in v.iter().zip(&exact) {
            assert!(*f.lo() <= e.lo().to_f64().unwrap() && e.hi().to_f64().unwrap() <= *f.hi());
        }
        let k = nozaki_values(&roots, 0).unwrap();
        let prod = k.iter().fold(1.0, |acc, x| acc * (x.lo() + x.hi()) / 2.0);
        assert!((prod - 121.0).abs() < 1e-6);
    }

    #[test]
    fn precision_is_monotone() {
        let qd = DerivedQuantities::raw(23, 5000);
        let mut prev: Option<InnerProductSpectrum> = None;
        for p in [32, 64, 128, 256] {
            let s = solve_quartic(&qd, p).unwrap();
            if let Some(prev) = &prev {
                for (new, old) in s.roots().iter().zip(prev.roots()) {
                    assert!(new.is_subset_of(old));
                }
            }
            prev = Some(s);
        }
    }

    #[test]
    fn oracle_agreement_on_xyzt_integer_candidates() {
        let mut found = Vec::new();
        for n in 3..=40 {
            let d = DimensionIntegrality::new(n).unwrap();
            let (lo, hi) = cardinality_bounds(n).unwrap();
            d.scan_range(lo + 1, hi, |m, v| {
                if v.xyzt {
                    found.push((n, m));
                }
                Ok(())
            })
            .unwrap();
        }
        assert!(found.len() >= 5, "{found:?}");
        for (n, m) in found {
            let c = cand(n, m);
            assert!(is_integer(&xyzt_product(&c).unwrap()));
            let a = full_candidate_analysis(&c, &Policy::default()).unwrap();
            assert!(a.refutation().is_some());
            let s = a.spectrum.unwrap();
            let dd = a.distances.unwrap();
            let k = a.nozaki.unwrap();
            assert!(dd.product().contains(&xyzt_product(&c).unwrap()));
            assert!(k.product().contains(&nozaki_product(&c).unwrap()));
            assert!(dd.moment_identities_hold(&s, n, m));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_candidates_satisfy_invariants(n in 3u64..120, t in 0.0f64..1.0) {
            let (lo, hi) = cardinality_bounds(n).unwrap();
            let m = lo + 1 + ((hi - lo - 1) as f64 * t) as u64;
            let c = cand(n, m);
            let qd = derived_quantities(&c);
            let f = qd.quartic.to_poly().map(|x| BigRational::from_integer(x.clone()));
            let sturm = f.sturm_sequence();
            let in_range = sturm.count_roots(&q(-1, 1), &q(1, 1));
            match solve_quartic(&qd, 80) {
                Ok(s) => {
                    prop_assert_eq!(in_range, 4);
                    let dd = distance_distribution(&s, &c).unwrap().unwrap();
                    let k = nozaki_coefficients(&s, &c).unwrap().unwrap();
                    prop_assert!(dd.product().contains(&dd.exact_product));
                    prop_assert!(k.product().contains(&k.exact_product));
                    prop_assert!(k.sum().contains(&BigRational::one()));
                    prop_assert!(dd.moment_identities_hold(&s, n, m));
                }
                Err(Refutation::RootOutOfRange { in_range: got }) => prop_assert_eq!(got, in_range),
                Err(_) => {}
            }
        }
    }
}
