//! Continued fractions and the weight expansion `w(a)` of a rational
//! `a >= 1`.
//!
//! The weight expansion is the canonical decomposition of the ellipsoid
//! `E(1,a)` into balls: a finite nonincreasing sequence of rationals whose
//! block multiplicities are exactly the continued-fraction terms of `a`.

use crate::exactnum::{floor_to_int, Rational};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Continued fraction `[l0; l1, ..., lN]` of a rational `a >= 1`, in the
/// Euclidean normal form (last term `>= 2` unless `a` is an integer).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub terms: Vec<u64>,
}

impl ContinuedFraction {
    /// Reconstructs the rational the expansion came from.
    pub fn value(&self) -> Rational {
        let mut it = self.terms.iter().rev();
        let last = *it.next().expect("empty continued fraction");
        let mut acc = Rational::from_integer(BigInt::from(last));
        for &t in it {
            acc = Rational::from_integer(BigInt::from(t)) + acc.recip();
        }
        acc
    }
}

/// Euclidean continued fraction of `a >= 1`.
pub fn continued_fraction(a: &Rational) -> Result<ContinuedFraction> {
    if a < &Rational::one() {
        return Err(Error::Domain(format!("continued fraction needs a >= 1, got {a}")));
    }
    let mut p = a.numer().clone();
    let mut q = a.denom().clone();
    let mut terms = Vec::new();
    while !q.is_zero() {
        let (quot, rem) = num_integer::Integer::div_rem(&p, &q);
        terms.push(
            quot.to_u64()
                .ok_or_else(|| Error::Domain(format!("continued-fraction term of {a} overflows")))?,
        );
        p = q;
        q = rem;
    }
    Ok(ContinuedFraction { terms })
}

/// The weight expansion of `a`, stored both as explicit entries and as
/// `(value, multiplicity)` blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightExpansion {
    entries: Vec<Rational>,
    blocks: Vec<(Rational, u64)>,
    source: Rational,
}

impl WeightExpansion {
    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn blocks(&self) -> &[(Rational, u64)] {
        &self.blocks
    }

    pub fn source(&self) -> &Rational {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> Rational {
        self.entries.iter().sum()
    }

    pub fn sum_of_squares(&self) -> Rational {
        self.entries.iter().map(|w| w * w).sum()
    }
}

/// Weight expansion of `a >= 1`, computed from the continued-fraction
/// blocks: `x0 = 1`, `x1 = a - l0`, `x_i = x_{i-2} - l_{i-1} x_{i-1}`, and
/// block `i` consists of `l_i` copies of `x_i`.
pub fn weight_expansion(a: &Rational) -> Result<WeightExpansion> {
    let cf = continued_fraction(a)?;
    let l0 = cf.terms[0];
    let mut blocks: Vec<(Rational, u64)> = vec![(Rational::one(), l0)];
    if cf.terms.len() > 1 {
        let mut prev = Rational::one();
        let mut cur = a - Rational::from_integer(BigInt::from(l0));
        blocks.push((cur.clone(), cf.terms[1]));
        for i in 2..cf.terms.len() {
            let li_prev = Rational::from_integer(BigInt::from(cf.terms[i - 1]));
            let next = prev - &li_prev * &cur;
            blocks.push((next.clone(), cf.terms[i]));
            prev = cur;
            cur = next;
        }
    }
    let mut entries = Vec::new();
    for (value, mult) in &blocks {
        debug_assert!(value.is_positive());
        for _ in 0..*mult {
            entries.push(value.clone());
        }
    }
    Ok(WeightExpansion {
        entries,
        blocks,
        source: a.clone(),
    })
}

/// Number of entries of `w(a)`, i.e. the sum of the continued-fraction
/// terms of `a`.
pub fn length(a: &Rational) -> Result<u64> {
    Ok(continued_fraction(a)?.terms.iter().sum())
}

/// Scalar product `<m, w>` with the shorter vector zero-padded.
pub fn scalar_product(m: &[BigInt], w: &WeightExpansion) -> Rational {
    m.iter()
        .zip(w.entries())
        .map(|(mi, wi)| Rational::from_integer(mi.clone()) * wi)
        .sum()
}

/// Subtractive form of the weight-expansion definition; used as an
/// independent oracle for `weight_expansion`.
pub fn weight_expansion_subtractive(a: &Rational) -> Result<Vec<Rational>> {
    if a < &Rational::one() {
        return Err(Error::Domain(format!("weight expansion needs a >= 1, got {a}")));
    }
    let mut w: Vec<Rational> = vec![Rational::one()];
    loop {
        // Locate the tail block w_{i+1} = ... = w_n and its predecessor w_i
        // (with w_0 := a).
        let n = w.len();
        let tail = w[n - 1].clone();
        let mut start = n;
        while start > 0 && w[start - 1] == tail {
            start -= 1;
        }
        let prev = if start == 0 { a.clone() } else { w[start - 1].clone() };
        let count = (n - start) as i64 + 1;
        let next = if Rational::from_integer(BigInt::from(count)) * &tail <= prev {
            tail.clone()
        } else {
            &prev - Rational::from_integer(BigInt::from(count - 1)) * &tail
        };
        if next.is_zero() {
            return Ok(w);
        }
        assert!(next.is_positive(), "subtractive weight recursion broke");
        w.push(next);
        assert!(w.len() <= 4096, "weight expansion unreasonably long");
    }
}

/// `floor(x)` of every entry of `c * w(a)`, exactly.
pub fn floor_scaled(w: &WeightExpansion, c: &Rational) -> Vec<BigInt> {
    w.entries().iter().map(|wi| floor_to_int(&(wi * c))).collect()
}
