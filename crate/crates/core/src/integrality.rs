//! Exact integrality decisions for `XYZT` and `k_a k_b k_c k_d` at scan speed.
//!
//! Both products have the form `P / (d · R(n, M))` with `P` a product of
//! small factors (`M`, `A`, `n - 1`, `n + 1`, `n + 4`). Integrality forces
//! `R | P`, hence `|R| <= ∏_{p | R} p^{v_p(P)}`. A prime dividing both `R`
//! and `M` divides `R mod M = n^6 (n+1)^5 (n+2)^3 (n+5)^3 (n+7)^4`; a prime
//! `p > 3` dividing both `R` and `A` divides
//! `6^6 R mod A = 6^6 n^6 (n-1)^6 (n+1)^5 (n+2) (n+4) (n+5)^2`. So only the
//! primes of `6 n (n-1) (n+1) (n+2) (n+4) (n+5) (n+7)` can contribute, and
//! the cap `G` is a product of a per-dimension constant and the powers of
//! those primes in `M` and `A`.
//!
//! When `G < 2^254` and `R | P`, `R` fits an `I256` and equals its
//! evaluation modulo `2^256`; a wrapping evaluation with `|R| > G` is then
//! a proof of non-integrality. Everything else falls back to big integers,
//! so the answer is always exact.

use ethnum::{I256, U256};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::formulas::{cardinality_bounds, ReducedDiscriminant};
use crate::sieve::factorize;

const CAP_LIMIT: U256 = U256::from_words(1 << 62, 0);

/// Exact integrality of both products for one candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductIntegrality {
    pub xyzt: bool,
    pub nozaki: bool,
}

/// Per-dimension tables for deciding integrality of both products.
#[derive(Clone, Debug)]
pub struct DimensionIntegrality {
    n: u64,
    r_exact: ReducedDiscriminant<BigInt>,
    r_wrapping: [I256; 7],
    /// `A = 6 (M - shift)`.
    shift: u64,
    primes: Vec<PrimeData>,
}

/// What one relevant prime can contribute to the caps.
#[derive(Clone, Debug)]
struct PrimeData {
    p: u64,
    /// `v_p(6)`.
    v6: u32,
    /// `v_p` of the constant numerator factors, less `v_p(54 n^4 (n+1)^2)`
    /// for `XYZT`.
    xyzt_fixed: i32,
    nozaki_fixed: i32,
    /// `v_p(R(0))`; `v_p(R(M))` equals it once `v_p(M)` exceeds it.
    r_at_zero: u32,
    /// `v_p(R(shift))`, same role for `M - shift`. `None` if `R(shift) = 0`.
    r_at_shift: Option<u32>,
}

fn wrap_i256(x: &BigInt) -> I256 {
    let modulus = BigInt::from(1u8) << 256;
    let r = x.mod_floor(&modulus);
    let mask = (BigInt::from(1u8) << 128) - 1u32;
    let lo = (&r & &mask).to_u128().expect("low word");
    let hi = (&r >> 128u32).to_u128().expect("high word");
    U256::from_words(hi, lo).as_i256()
}

fn big_valuation(x: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

impl DimensionIntegrality {
    pub fn new(n: u64) -> Result<Self> {
        cardinality_bounds(n)?;
        let r_exact = ReducedDiscriminant::new(&BigInt::from(n));
        let r_wrapping = std::array::from_fn(|k| wrap_i256(&r_exact.coeffs()[k]));
        let mut primes = vec![2, 3];
        for x in [n, n - 1, n + 1, n + 2, n + 4, n + 5, n + 7] {
            primes.extend(factorize(x).into_iter().map(|(p, _)| p));
        }
        primes.sort_unstable();
        primes.dedup();
        let shift = n * (n + 1) * (n + 5) / 6;
        let r0 = &r_exact.coeffs()[0];
        let rs = r_exact.eval(&BigInt::from(shift));
        let primes = primes
            .into_iter()
            .map(|p| {
                let v = |x: u64| valuation(x, p) as i32;
                PrimeData {
                    p,
                    v6: valuation(6, p),
                    xyzt_fixed: 2 * v(n - 1) + 4 * v(n + 4) - v(54) - 4 * v(n) - 2 * v(n + 1),
                    nozaki_fixed: v(2) + v(n + 1) + 2 * v(n + 4) + 3 * v(n - 1),
                    r_at_zero: big_valuation(r0, p),
                    r_at_shift: (!rs.is_zero()).then(|| big_valuation(&rs, p)),
                }
            })
            .collect();
        Ok(DimensionIntegrality {
            n,
            r_exact,
            r_wrapping,
            shift,
            primes,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Primes that may divide both `R(n, M)` and one of the numerators.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().map(|d| d.p)
    }

    /// `R(n, M)` modulo `2^256`, as a two's-complement value.
    #[inline]
    pub fn r_wrapping(&self, m: u64) -> I256 {
        let m = I256::from(m);
        self.r_wrapping
            .iter()
            .rev()
            .fold(I256::ZERO, |acc, &c| acc.wrapping_mul(m).wrapping_add(c))
    }

    pub fn r_exact(&self, m: u64) -> BigInt {
        self.r_exact.eval(&BigInt::from(m))
    }

    /// Exact decision, one candidate; see [`Cursor`] for sequential scans.
    pub fn decide(&self, m: u64) -> Result<ProductIntegrality> {
        self.cursor(m, 1).decide()
    }

    /// Walks `M = start, start + step, …` keeping residues modulo the
    /// relevant primes up to date.
    pub fn cursor(&self, start: u64, step: u64) -> Cursor<'_> {
        let u = start - self.shift;
        let residues = self
            .primes
            .iter()
            .map(|d| Residue {
                p: d.p,
                m: start % d.p,
                u: u % d.p,
                step: step % d.p,
            })
            .collect();
        Cursor {
            dim: self,
            m: start,
            step,
            residues,
        }
    }

    /// Big-integer decision used when the cap is inconclusive.
    pub fn decide_exact(&self, m: u64) -> Result<ProductIntegrality> {
        let r = self.r_exact(m);
        if r.is_zero() {
            return Err(Error::SingularDenominator { n: self.n, m });
        }
        let n = BigInt::from(self.n);
        let mb = BigInt::from(m);
        let a = BigInt::from(6 * (m - self.shift));
        let m3 = mb.pow(3);
        let nm1 = &n - 1u32;
        let n1 = &n + 1u32;
        let n4 = &n + 4u32;
        let xyzt_num = &m3 * nm1.pow(2) * n4.pow(4) * a.pow(7);
        let xyzt_den = BigInt::from(54) * n.pow(4) * n1.pow(2) * &r;
        let noz_num = BigInt::from(2)
            * &m3
            * &n1
            * n4.pow(2)
            * nm1.pow(3)
            * a.pow(3);
        Ok(ProductIntegrality {
            xyzt: (xyzt_num % xyzt_den).is_zero(),
            nozaki: (noz_num % r.abs()).is_zero(),
        })
    }
}

/// Fixed-point scale of the logarithmic weights.
const LOG_SCALE: f64 = (1u64 << 20) as f64;
const BLOCK: usize = 1 << 15;

impl PrimeData {
    /// Largest exponent of `p` either cap can contain, given `v_p(M)` and
    /// `v_p(M - shift)`.
    fn combined_exponent(&self, vm: u32, vu: u32) -> u32 {
        let va = self.v6 + vu;
        let ex = self.xyzt_fixed + (3 * vm + 7 * va) as i32;
        let ez = self.nozaki_fixed + (3 * vm + 3 * va) as i32;
        let mut e = ex.max(ez).max(0) as u32;
        if vm > self.r_at_zero {
            e = e.min(self.r_at_zero);
        }
        if let Some(s) = self.r_at_shift {
            if vu > s {
                e = e.min(s);
            }
        }
        e
    }

    fn log_weight(&self, vm: u32, vu: u32) -> i64 {
        let unit = ((self.p as f64).log2() * LOG_SCALE).ceil() as i64;
        unit * self.combined_exponent(vm, vu) as i64
    }
}

impl DimensionIntegrality {
    /// Calls `visit` for every `M` in `lo..=hi` at which at least one
    /// product is an integer.
    ///
    /// A logarithmic sieve bounds both caps from above for a whole block
    /// at once; only the positions it cannot rule out go through a
    /// [`Cursor`].
    pub fn scan_range(
        &self,
        lo: u64,
        hi: u64,
        mut visit: impl FnMut(u64, ProductIntegrality) -> Result<()>,
    ) -> Result<()> {
        let mut weights = vec![0i64; BLOCK];
        let mut start = lo;
        while start <= hi {
            let len = ((hi - start) as usize + 1).min(BLOCK);
            let threshold = self.block_threshold(start, len as u64);
            self.sieve_block(start, &mut weights[..len]);
            for (i, &w) in weights[..len].iter().enumerate() {
                if threshold.is_some_and(|t| w < t) {
                    continue;
                }
                let m = start + i as u64;
                let verdict = self.decide(m)?;
                if verdict.xyzt || verdict.nozaki {
                    visit(m, verdict)?;
                }
            }
            start += len as u64;
        }
        Ok(())
    }

    /// Scaled lower bound on `log2 |R(M)|` over `start..start + len`,
    /// from the Taylor expansion at `start`.
    fn block_threshold(&self, start: u64, len: u64) -> Option<i64> {
        let mut taylor: Vec<BigInt> = self.r_exact.coeffs().to_vec();
        let a = BigInt::from(start);
        for i in 0..taylor.len() {
            for j in (i..taylor.len() - 1).rev() {
                let next = &taylor[j + 1] * &a;
                taylor[j] += next;
            }
        }
        let width = BigInt::from(len - 1);
        let mut slack = BigInt::zero();
        let mut power = BigInt::from(1u8);
        for d in &taylor[1..] {
            power *= &width;
            slack += d.abs() * &power;
        }
        let bound = taylor[0].abs() - slack;
        if bound <= BigInt::zero() {
            return None;
        }
        Some(((bound.bits() - 1) as f64 * LOG_SCALE) as i64)
    }

    fn sieve_block(&self, start: u64, weights: &mut [i64]) {
        let len = weights.len() as u64;
        let base: i64 = self.primes.iter().map(|d| d.log_weight(0, 0)).sum();
        weights.fill(base);
        for d in &self.primes {
            let p = d.p;
            let w00 = d.log_weight(0, 0);
            if self.shift % p == 0 {
                let mut m = start.next_multiple_of(p);
                while m < start + len {
                    let (vm, vu) = (valuation(m, p), valuation(m - self.shift, p));
                    weights[(m - start) as usize] += d.log_weight(vm, vu) - w00;
                    m += p;
                }
                continue;
            }
            // Here `p` never divides both `M` and `M - shift`, so each
            // exponent level adds independently.
            let mut q = p;
            let mut k = 1;
            while q <= start + len {
                let dm = d.log_weight(k, 0) - d.log_weight(k - 1, 0);
                if dm != 0 {
                    let mut m = start.next_multiple_of(q);
                    while m < start + len {
                        weights[(m - start) as usize] += dm;
                        m += q;
                    }
                }
                let du = d.log_weight(0, k) - d.log_weight(0, k - 1);
                if du != 0 {
                    let offset = (self.shift % q + q - start % q) % q;
                    let mut i = offset;
                    while i < len {
                        weights[i as usize] += du;
                        i += q;
                    }
                }
                match q.checked_mul(p) {
                    Some(next) => q = next,
                    None => break,
                }
                k += 1;
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Residue {
    p: u64,
    m: u64,
    u: u64,
    step: u64,
}

/// Sequential walk over `M` within one dimension.
#[derive(Clone, Debug)]
pub struct Cursor<'a> {
    dim: &'a DimensionIntegrality,
    m: u64,
    step: u64,
    residues: Vec<Residue>,
}

/// Upper bound on `|R|` under the hypothesis that a product is integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cap {
    Bound(U256),
    /// The hypothesis is contradicted outright.
    Refuted,
    /// The bound is too large to be useful.
    Unknown,
}

impl Cap {
    /// Multiplies in the contribution of `p`, given `v_p(R) <= e` and
    /// `v_p(R) <= bound`, where `bound` is exact if `exact` is set.
    fn absorb(&mut self, p: u64, e: i32, bound: u32, exact: bool) {
        if let Cap::Bound(acc) = self {
            if e < 0 || (exact && bound as i64 > e as i64) {
                *self = Cap::Refuted;
                return;
            }
            let k = (e as u32).min(bound);
            for _ in 0..k {
                match acc.checked_mul(U256::from(p)) {
                    Some(next) if next < CAP_LIMIT => *acc = next,
                    _ => {
                        *self = Cap::Unknown;
                        return;
                    }
                }
            }
        }
    }

    fn refutes(self, r: U256) -> bool {
        match self {
            Cap::Bound(g) => r > g,
            Cap::Refuted => true,
            Cap::Unknown => false,
        }
    }
}

fn valuation(mut x: u64, p: u64) -> u32 {
    if p == 2 {
        return x.trailing_zeros();
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

impl Cursor<'_> {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn advance(&mut self) {
        self.m += self.step;
        for r in &mut self.residues {
            r.m += r.step;
            if r.m >= r.p {
                r.m -= r.p;
            }
            r.u += r.step;
            if r.u >= r.p {
                r.u -= r.p;
            }
        }
    }

    /// Caps on `|R|` implied by integrality of `XYZT` and of the Nozaki
    /// product; `None` means the product is ruled out or the cap is too
    /// large to use. `w` is `R` modulo `2^256`, which equals `R` whenever
    /// either cap holds.
    fn caps(&self, w: I256) -> (Cap, Cap) {
        let mut xyzt = Cap::Bound(U256::ONE);
        let mut nozaki = Cap::Bound(U256::ONE);
        let u = self.m - self.dim.shift;
        for (r, d) in self.residues.iter().zip(&self.dim.primes) {
            let vm = if r.m == 0 { valuation(self.m, r.p) } else { 0 };
            let vu = if r.u == 0 { valuation(u, r.p) } else { 0 };
            let va = d.v6 + vu;
            let mut bound = u32::MAX;
            if r.p == 2 {
                bound = w.trailing_zeros();
            }
            if vm > d.r_at_zero {
                bound = bound.min(d.r_at_zero);
            }
            if let Some(s) = d.r_at_shift {
                if vu > s {
                    bound = bound.min(s);
                }
            }
            let ex = d.xyzt_fixed + (3 * vm + 7 * va) as i32;
            let ez = d.nozaki_fixed + (3 * vm + 3 * va) as i32;
            xyzt.absorb(r.p, ex, bound, r.p == 2);
            nozaki.absorb(r.p, ez, bound, r.p == 2);
        }
        (xyzt, nozaki)
    }

    /// Exact integrality of both products at the current `M`.
    pub fn decide(&mut self) -> Result<ProductIntegrality> {
        let w = self.dim.r_wrapping(self.m);
        if w == I256::ZERO {
            return self.dim.decide_exact(self.m);
        }
        let r = w.unsigned_abs();
        let (xyzt_cap, nozaki_cap) = self.caps(w);
        let xyzt_refuted = xyzt_cap.refutes(r);
        let nozaki_refuted = nozaki_cap.refutes(r);
        if xyzt_refuted && nozaki_refuted {
            return Ok(ProductIntegrality {
                xyzt: false,
                nozaki: false,
            });
        }
        let exact = self.dim.decide_exact(self.m)?;
        debug_assert!(!(xyzt_refuted && exact.xyzt));
        debug_assert!(!(nozaki_refuted && exact.nozaki));
        Ok(exact)
    }
}
