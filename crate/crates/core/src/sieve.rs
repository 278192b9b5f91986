//! Divisibility refutations: `p`-adic valuations and the case analyses
//! relating `n`, `n + 1` and `M` when `XYZT` is an integer.
//!
//! All tests here are a handful of machine-integer operations, so the scan
//! runs them on every candidate before touching big integers.

use std::fmt;

use num_integer::Integer;
use num_traits::FromPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::DesignCandidate;

/// Exponent of the prime `p` in the nonzero integer `x`.
pub fn p_adic_valuation<T>(x: &T, p: u64) -> Result<u32>
where
    T: Integer + Clone + FromPrimitive,
{
    if !is_prime(p) {
        return Err(Error::NotPrime { p });
    }
    if x.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let p = T::from_u64(p).ok_or(Error::NotPrime { p })?;
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Ok(v);
        }
        x = q;
        v += 1;
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `v_2(x)` for `x != 0`.
#[inline]
pub fn v2(x: u64) -> u32 {
    debug_assert!(x != 0);
    x.trailing_zeros()
}

/// `v_3(x)` for `x != 0`.
#[inline]
pub fn v3(mut x: u64) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % 3 == 0 {
        x /= 3;
        v += 1;
    }
    v
}

#[inline]
fn divides_multiple(d: u64, k: u64, m: u64) -> bool {
    // d | k·m
    ((k as u128 % d as u128) * (m as u128 % d as u128)) % d as u128 == 0
}

#[inline]
fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    // Operands are reduced below m <= 2^64, so the product fits.
    (a % m) * (b % m) % m
}

/// `d | k·M^e` for small `e`.
fn divides_power(d: u128, k: u128, m: u64, e: u32) -> bool {
    let base = m as u128 % d;
    let mut acc = k % d;
    for _ in 0..e {
        acc = mulmod(acc, base, d);
    }
    acc == 0
}

/// Case labels for the analysis of the prime divisors of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lemma3Case {
    A,
    B1,
    B2,
    B3,
    C1,
    C2,
    D1,
    D2,
    D3,
    D4,
}

impl Lemma3Case {
    pub const ALL: [Lemma3Case; 10] = [
        Lemma3Case::A,
        Lemma3Case::B1,
        Lemma3Case::B2,
        Lemma3Case::B3,
        Lemma3Case::C1,
        Lemma3Case::C2,
        Lemma3Case::D1,
        Lemma3Case::D2,
        Lemma3Case::D3,
        Lemma3Case::D4,
    ];

    /// The case concludes `n | multiplier · M`.
    pub fn multiplier(self) -> u64 {
        match self {
            Lemma3Case::A | Lemma3Case::B1 | Lemma3Case::C1 | Lemma3Case::D1 => 1,
            Lemma3Case::B3 => 2,
            Lemma3Case::C2 | Lemma3Case::D2 => 3,
            Lemma3Case::B2 => 4,
            Lemma3Case::D3 => 6,
            Lemma3Case::D4 => 12,
        }
    }

    fn guard(self, g: &Lemma3Inputs) -> bool {
        let coprime3 = g.n % 3 != 0;
        let even = g.n % 2 == 0;
        let div6 = g.n % 6 == 0;
        let two_generic = g.v2n != 2 && g.v2n != 1 + g.v2m;
        let three_shift = g.v3n == 1 + g.v3m;
        match self {
            Lemma3Case::A => g.n.gcd(&6) == 1,
            Lemma3Case::B1 => coprime3 && even && two_generic,
            Lemma3Case::B2 => coprime3 && g.v2n == 2,
            Lemma3Case::B3 => coprime3 && g.v2n == 1 + g.v2m,
            Lemma3Case::C1 => !even && g.n % 3 == 0 && !three_shift,
            Lemma3Case::C2 => !even && three_shift,
            Lemma3Case::D1 => div6 && !three_shift && two_generic,
            Lemma3Case::D2 => div6 && three_shift && two_generic,
            Lemma3Case::D3 => div6 && three_shift && g.v2n == 1 + g.v2m,
            Lemma3Case::D4 => div6 && three_shift && g.v2n == 2,
        }
    }
}

/// Case labels for the analysis of the prime divisors of `n + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lemma5Case {
    A,
    B,
    C,
    D,
}

impl fmt::Display for Lemma3Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Lemma5Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How the case guards matched a candidate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuardCoverage {
    /// Exactly one guard holds.
    Unique,
    /// Several guards hold; the weakest conclusion among them is tested.
    Overlap(Vec<Lemma3Case>),
    /// No guard holds (`6 | n`, `v_3(n) != 1 + v_3(M)`, `v_2(n)` in
    /// `{2, 1 + v_2(M)}`); the weakest `D` conclusion that still follows
    /// prime by prime is tested.
    Uncovered,
}

/// Outcome of one divisibility lemma on one candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaVerdict<C> {
    pub passed: bool,
    pub case: C,
    /// The divisibility that was tested, e.g. `"7 | 196"`.
    pub required: String,
    pub coverage: GuardCoverage,
}

struct Lemma3Inputs {
    n: u64,
    v2n: u32,
    v3n: u32,
    v2m: u32,
    v3m: u32,
}

impl Lemma3Inputs {
    fn new(n: u64, m: u64) -> Self {
        Lemma3Inputs {
            n,
            v2n: v2(n),
            v3n: v3(n),
            v2m: v2(m),
            v3m: v3(m),
        }
    }

    /// Multiplier of the case `lemma3_case` selects, without allocating.
    fn multiplier(&self) -> u64 {
        let mut matched = false;
        let mut k = 0;
        for c in Lemma3Case::ALL {
            if c.guard(self) {
                matched = true;
                k = k.max(c.multiplier());
            }
        }
        if matched {
            k
        } else if self.v2n == 2 {
            Lemma3Case::D4.multiplier()
        } else {
            Lemma3Case::D3.multiplier()
        }
    }
}

/// Which `Lemma3Case` applies to `(n, M)`, and how the guards matched.
pub fn lemma3_case(n: u64, m: u64) -> (Lemma3Case, GuardCoverage) {
    let g = Lemma3Inputs::new(n, m);
    let matched: Vec<Lemma3Case> = Lemma3Case::ALL
        .into_iter()
        .filter(|c| c.guard(&g))
        .collect();
    match matched.as_slice() {
        [only] => (*only, GuardCoverage::Unique),
        [] => {
            let case = if g.v2n == 2 {
                Lemma3Case::D4
            } else {
                Lemma3Case::D3
            };
            log::debug!("n={n} M={m}: no guard of the n-analysis holds, testing {case}");
            (case, GuardCoverage::Uncovered)
        }
        several => {
            let weakest = *several
                .iter()
                .max_by_key(|c| c.multiplier())
                .expect("nonempty");
            log::debug!("n={n} M={m}: guards {several:?} overlap, testing {weakest}");
            (weakest, GuardCoverage::Overlap(several.to_vec()))
        }
    }
}

pub fn lemma3_verdict(c: &DesignCandidate) -> LemmaVerdict<Lemma3Case> {
    let (n, m) = (c.n(), c.m());
    let (case, coverage) = lemma3_case(n, m);
    let k = case.multiplier();
    let required = if k == 1 {
        format!("{n} | {m}")
    } else {
        format!("{n} | {k}*{m}")
    };
    LemmaVerdict {
        passed: divides_multiple(n, k, m),
        case,
        required,
        coverage,
    }
}

pub fn lemma5_case(n: u64) -> Lemma5Case {
    let s = n + 1;
    match (s % 2 == 0, s % 3 == 0) {
        (false, false) => Lemma5Case::A,
        (true, false) => Lemma5Case::B,
        (false, true) => Lemma5Case::C,
        (true, true) => Lemma5Case::D,
    }
}

fn lemma5_passes(n: u64, m: u64) -> bool {
    let s = n as u128 + 1;
    match lemma5_case(n) {
        Lemma5Case::A => divides_power(s, 1, m, 2),
        Lemma5Case::B => divides_power(s, 16, m, 2),
        Lemma5Case::C => divides_power(s, 3, m, 2),
        Lemma5Case::D => divides_power(s * s, 48, m, 4),
    }
}

pub fn lemma5_verdict(c: &DesignCandidate) -> LemmaVerdict<Lemma5Case> {
    let (n, m) = (c.n(), c.m());
    let s = n as u128 + 1;
    let case = lemma5_case(n);
    let (passed, required) = match case {
        Lemma5Case::A => (divides_power(s, 1, m, 2), format!("{s} | {m}^2")),
        Lemma5Case::B => (divides_power(s, 16, m, 2), format!("{s} | 16*{m}^2")),
        Lemma5Case::C => (divides_power(s, 3, m, 2), format!("{s} | 3*{m}^2")),
        Lemma5Case::D => (
            divides_power(s * s, 48, m, 4),
            format!("{s}^2 | 48*{m}^4"),
        ),
    };
    LemmaVerdict {
        passed,
        case,
        required,
        coverage: GuardCoverage::Unique,
    }
}

/// `n | 12M` and `(n + 1) | 4M^2`.
#[inline]
pub fn coarse_sieve(c: &DesignCandidate) -> bool {
    coarse_sieve_raw(c.n(), c.m())
}

#[inline]
pub(crate) fn coarse_sieve_raw(n: u64, m: u64) -> bool {
    divides_multiple(n, 12, m) && divides_power(n as u128 + 1, 4, m, 2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FineVerdict {
    pub passed: bool,
    pub lemma3: LemmaVerdict<Lemma3Case>,
    pub lemma5: LemmaVerdict<Lemma5Case>,
}

/// Both case-specific lemma tests.
pub fn fine_sieve(c: &DesignCandidate) -> FineVerdict {
    let lemma3 = lemma3_verdict(c);
    let lemma5 = lemma5_verdict(c);
    FineVerdict {
        passed: lemma3.passed && lemma5.passed,
        lemma3,
        lemma5,
    }
}

/// `fine_sieve(c).passed`, without building the verdicts.
#[inline]
pub fn fine_sieve_passes(n: u64, m: u64) -> bool {
    let k = Lemma3Inputs::new(n, m).multiplier();
    divides_multiple(n, k, m) && lemma5_passes(n, m)
}

/// Prime factorisation by trial division, ascending primes.
pub fn factorize(mut x: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= x {
        if x % p == 0 {
            let mut e = 0;
            while x % p == 0 {
                x /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

/// The smallest `L` with `coarse_sieve(n, M) <=> L | M`.
///
/// `n | 12M` iff `n / gcd(n, 12)` divides `M`; `(n+1) | 4M^2` iff every
/// `p^e || n+1` has `v_p(4) + 2 v_p(M) >= e`.
pub fn coarse_stride(n: u64) -> u64 {
    let from_n = n / n.gcd(&12);
    let from_n1: u64 = factorize(n + 1)
        .into_iter()
        .map(|(p, e)| {
            let slack = if p == 2 { 2 } else { 0 };
            let need = e.saturating_sub(slack).div_ceil(2);
            p.pow(need)
        })
        .product();
    from_n.lcm(&from_n1)
}
