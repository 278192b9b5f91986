//! Dense univariate polynomials with Sturm sequences.

use std::fmt;

use num_traits::{Num, Signed, Zero};

/// A dense polynomial with coefficients stored in ascending degree order.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Clone + Num> Poly<T> {
    /// Builds a polynomial from ascending coefficients, trimming leading zeros.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| {
                let mut k = T::zero();
                for _ in 0..i {
                    k = k + T::one();
                }
                c.clone() * k
            })
            .collect();
        Poly::new(coeffs)
    }

    pub fn map<U: Clone + Num>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|c| c.clone() * k.clone())
    }

    /// Euclidean division over a field: returns `(quotient, remainder)`.
    ///
    /// Panics on division by the zero polynomial.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.coeffs[d].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![T::zero(); rem.len() - d];
        for i in (0..quot.len()).rev() {
            let q = rem[i + d].clone() / lead.clone();
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = rem[i + j].clone() - q.clone() * c.clone();
            }
            quot[i] = q;
        }
        rem.truncate(d);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor over a field; zero if both are zero.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        match a.leading().cloned() {
            Some(lead) => a.map(|c| c.clone() / lead.clone()),
            None => a,
        }
    }

    /// `f(-t)`.
    pub fn reflect(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i % 2 == 1 {
                    T::zero() - c.clone()
                } else {
                    c.clone()
                }
            })
            .collect();
        Poly::new(coeffs)
    }
}

impl<T: Clone + Num + Signed> Poly<T> {
    /// Sturm sequence `p0 = f, p1 = f', p_{k+1} = -rem(p_{k-1}, p_k)` over a field.
    ///
    /// The last element is (a scalar multiple of) `gcd(f, f')`.
    pub fn sturm_sequence(&self) -> SturmSequence<T> {
        let mut seq = vec![self.clone()];
        if self.degree().unwrap_or(0) == 0 {
            return SturmSequence { seq };
        }
        seq.push(self.derivative());
        loop {
            let k = seq.len();
            let (_, r) = seq[k - 2].div_rem(&seq[k - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.map(|c| -c.clone()));
        }
        SturmSequence { seq }
    }
}

impl<T: fmt::Display + Zero> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{i}")?,
            }
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Poly").field(&self.coeffs).finish()
    }
}

/// A Sturm chain for root counting.
#[derive(Clone, Debug)]
pub struct SturmSequence<T> {
    seq: Vec<Poly<T>>,
}

impl<T: Clone + Num + Signed + PartialOrd> SturmSequence<T> {
    pub fn polys(&self) -> &[Poly<T>] {
        &self.seq
    }

    /// True when the last chain element is a nonzero constant, i.e. `f` has
    /// no repeated roots.
    pub fn is_squarefree(&self) -> bool {
        self.seq.last().and_then(Poly::degree) == Some(0)
    }

    /// Number of sign changes of the chain at `x`, zeros skipped.
    pub fn variations(&self, x: &T) -> usize {
        let mut count = 0;
        let mut prev: Option<bool> = None;
        for p in &self.seq {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let pos = v.is_positive();
            if prev.is_some_and(|q| q != pos) {
                count += 1;
            }
            prev = Some(pos);
        }
        count
    }

    /// Variations at `+∞` (`positive = true`) or `-∞`.
    pub fn variations_at_infinity(&self, positive: bool) -> usize {
        let mut count = 0;
        let mut prev: Option<bool> = None;
        for p in &self.seq {
            let Some(lead) = p.leading() else { continue };
            let deg = p.degree().unwrap_or(0);
            let mut pos = lead.is_positive();
            if !positive && deg % 2 == 1 {
                pos = !pos;
            }
            if prev.is_some_and(|q| q != pos) {
                count += 1;
            }
            prev = Some(pos);
        }
        count
    }

    /// Distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots(&self, lo: &T, hi: &T) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }

    pub fn count_real_roots(&self) -> usize {
        self.variations_at_infinity(false)
            .saturating_sub(self.variations_at_infinity(true))
    }
}
