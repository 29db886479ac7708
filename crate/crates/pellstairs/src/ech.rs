//! ECH capacity sequences of ellipsoids and polydiscs, the dominance test
//! for embeddings, and the closed-form identity shared by `E(1,2)` and the
//! unit cube.

use crate::exactnum::Rational;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{Signed, Zero};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Domain descriptor for an ECH capacity sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EchDomain {
    Ellipsoid { a: Rational, b: Rational },
    Polydisc { a: Rational, b: Rational },
}

/// A lazily extendable ECH capacity sequence `c^1, c^2, ...` (1-indexed;
/// the first entry is always 0).
///
/// For the ellipsoid `E(a,b)` the entries are the numbers `ma + nb`
/// (`m, n >= 0`) in nondecreasing order with multiplicity, produced by a
/// k-smallest merge over the lattice rows `n = 0, 1, 2, ...` rather than by
/// materializing a grid. For the polydisc `P(a,b)` the k-th entry is
/// `min { am + bn : (m+1)(n+1) >= k+1 }`.
#[derive(Clone, Debug)]
pub struct EchSequence {
    domain: EchDomain,
    values: Vec<Rational>,
    // Min-heap over (value, row, column) for the ellipsoid merge.
    heap: BinaryHeap<Reverse<(Rational, u64, u64)>>,
}

impl EchSequence {
    pub fn ellipsoid(a: Rational, b: Rational) -> Result<Self> {
        check_positive(&a, &b)?;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Rational::zero(), 0, 0)));
        Ok(EchSequence {
            domain: EchDomain::Ellipsoid { a, b },
            values: Vec::new(),
            heap,
        })
    }

    pub fn polydisc(a: Rational, b: Rational) -> Result<Self> {
        check_positive(&a, &b)?;
        Ok(EchSequence {
            domain: EchDomain::Polydisc { a, b },
            values: Vec::new(),
            heap: BinaryHeap::new(),
        })
    }

    pub fn domain(&self) -> &EchDomain {
        &self.domain
    }

    /// Materializes entries up to index `k` (1-indexed).
    pub fn extend_to(&mut self, k: usize) {
        while self.values.len() < k {
            let next = match &self.domain {
                EchDomain::Ellipsoid { a, b } => {
                    let Reverse((value, n, m)) = self.heap.pop().expect("heap never empties");
                    self.heap.push(Reverse((&value + a, n, m + 1)));
                    if m == 0 {
                        let next_row = Rational::from_integer(BigInt::from(n + 1)) * b;
                        self.heap.push(Reverse((next_row, n + 1, 0)));
                    }
                    value
                }
                EchDomain::Polydisc { a, b } => polydisc_entry(a, b, self.values.len() as u64 + 1),
            };
            self.values.push(next);
        }
    }

    /// The k-th capacity, 1-indexed.
    pub fn entry(&mut self, k: usize) -> Result<Rational> {
        if k < 1 {
            return Err(Error::Domain("ECH index k starts at 1".into()));
        }
        self.extend_to(k);
        Ok(self.values[k - 1].clone())
    }

    /// The first `k` capacities.
    pub fn prefix(&mut self, k: usize) -> &[Rational] {
        self.extend_to(k);
        &self.values[..k]
    }
}

fn check_positive(a: &Rational, b: &Rational) -> Result<()> {
    if a.is_positive() && b.is_positive() {
        Ok(())
    } else {
        Err(Error::Domain("ECH domains need positive a, b".into()))
    }
}

/// `min { am + bn : m, n >= 0, (m+1)(n+1) >= k }` for the 1-indexed `k`
/// whose first entry is 0 (the index is shifted by one against the
/// 0-indexed combinatorial formula). The scan over `m` keeps `n` minimal
/// and stops as soon as `am` alone can no longer beat the best value found
/// (`n = 0, m = k - 1` is always feasible).
fn polydisc_entry(a: &Rational, b: &Rational, k: u64) -> Rational {
    let mut best: Option<Rational> = None;
    let mut m: u64 = 0;
    loop {
        let am = Rational::from_integer(BigInt::from(m)) * a;
        if let Some(ref cur) = best {
            if &am >= cur {
                break;
            }
        }
        // Smallest n with (m+1)(n+1) >= k.
        let n = k.div_ceil(m + 1) - 1;
        let candidate = am + Rational::from_integer(BigInt::from(n)) * b;
        if best.as_ref().is_none_or(|cur| &candidate < cur) {
            best = Some(candidate);
        }
        m += 1;
    }
    best.expect("polydisc minimum exists")
}

/// The k-th ECH capacity of the ellipsoid `E(a,b)`, 1-indexed.
pub fn ech_ellipsoid(a: &Rational, b: &Rational, k: usize) -> Result<Rational> {
    EchSequence::ellipsoid(a.clone(), b.clone())?.entry(k)
}

/// The k-th ECH capacity of the polydisc `P(a,b)`, 1-indexed.
pub fn ech_polydisc(a: &Rational, b: &Rational, k: usize) -> Result<Rational> {
    if k < 1 {
        return Err(Error::Domain("ECH index k starts at 1".into()));
    }
    check_positive(a, b)?;
    Ok(polydisc_entry(a, b, k as u64))
}

/// The unique integer `d` with
/// `floor((d+1)/2) ceil((d+1)/2) < k <= floor((d+2)/2) ceil((d+2)/2)`;
/// equals both `ech_ellipsoid(1,2,k)` and `ech_polydisc(1,1,k)`.
pub fn cube_identity_d(k: u64) -> Result<u64> {
    if k < 1 {
        return Err(Error::Domain("ECH index k starts at 1".into()));
    }
    let f = |d: u64| -> u64 { ((d + 2) / 2) * ((d + 2).div_ceil(2)) };
    // f is strictly increasing in d with f(d) ~ d^2/4; start near 2 sqrt(k).
    let mut d = (4 * k).sqrt().saturating_sub(3);
    while f(d) < k {
        d += 1;
    }
    while d > 0 && f(d - 1) >= k {
        d -= 1;
    }
    Ok(d)
}

/// Result of the dominance semi-decision: either every index up to `k_max`
/// is dominated, or the first violating index is reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dominance {
    DominatedUpTo(usize),
    ViolatedAt(usize),
}

/// Checks `c^k(e1) <= c^k(e2)` for `k = 1..=k_max`. A full dominance check
/// over all `k` decides the embedding question; this bounded version is a
/// semi-decision and is labeled as such.
pub fn dominates(e1: &mut EchSequence, e2: &mut EchSequence, k_max: usize) -> Dominance {
    for k in 1..=k_max {
        if e1.entry(k).expect("k >= 1") > e2.entry(k).expect("k >= 1") {
            return Dominance::ViolatedAt(k);
        }
    }
    Dominance::DominatedUpTo(k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};
    use proptest::prelude::*;

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat_int(x)).collect()
    }

    #[test]
    fn ellipsoid_examples() {
        let mut ball = EchSequence::ellipsoid(rat_int(1), rat_int(1)).unwrap();
        assert_eq!(ball.prefix(10), &ints(&[0, 1, 1, 2, 2, 2, 3, 3, 3, 3])[..]);

        let mut e12 = EchSequence::ellipsoid(rat_int(1), rat_int(2)).unwrap();
        assert_eq!(e12.prefix(6), &ints(&[0, 1, 2, 2, 3, 3])[..]);

        let mut e13 = EchSequence::ellipsoid(rat_int(1), rat_int(3)).unwrap();
        assert_eq!(e13.prefix(10), &ints(&[0, 1, 2, 3, 3, 4, 4, 5, 5, 6])[..]);

        assert!(ech_ellipsoid(&rat_int(1), &rat_int(1), 0).is_err());
    }

    #[test]
    fn polydisc_examples() {
        let mut cube = EchSequence::polydisc(rat_int(1), rat_int(1)).unwrap();
        assert_eq!(cube.prefix(12), &ints(&[0, 1, 2, 2, 3, 3, 4, 4, 4, 5, 5, 5])[..]);
        assert_eq!(ech_polydisc(&rat(7, 3), &rat(11, 2), 1).unwrap(), rat_int(0));
        assert_eq!(ech_polydisc(&rat_int(1), &rat_int(5), 4).unwrap(), rat_int(3));
    }

    /// Brute-force oracles over a small grid.
    fn ellipsoid_oracle(a: &Rational, b: &Rational, k: usize) -> Rational {
        let mut vals = Vec::new();
        for m in 0..60i64 {
            for n in 0..60i64 {
                vals.push(rat_int(m) * a + rat_int(n) * b);
            }
        }
        vals.sort();
        vals[k - 1].clone()
    }

    fn polydisc_oracle(a: &Rational, b: &Rational, k: u64) -> Rational {
        let mut best: Option<Rational> = None;
        for m in 0..=k as i64 {
            for n in 0..=k as i64 {
                if ((m + 1) * (n + 1)) as u64 >= k {
                    let v = rat_int(m) * a + rat_int(n) * b;
                    if best.as_ref().is_none_or(|cur| &v < cur) {
                        best = Some(v);
                    }
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn sequences_match_bruteforce() {
        let cases = [
            (rat_int(1), rat_int(1)),
            (rat_int(1), rat_int(2)),
            (rat(3, 2), rat(7, 3)),
            (rat(2, 5), rat(9, 4)),
        ];
        for (a, b) in &cases {
            let mut e = EchSequence::ellipsoid(a.clone(), b.clone()).unwrap();
            for k in 1..=40 {
                assert_eq!(e.entry(k).unwrap(), ellipsoid_oracle(a, b, k));
            }
            for k in 1..=25u64 {
                assert_eq!(
                    ech_polydisc(a, b, k as usize).unwrap(),
                    polydisc_oracle(a, b, k)
                );
            }
        }
    }

    #[test]
    fn cube_identity_examples() {
        assert_eq!(cube_identity_d(1).unwrap(), 0);
        assert_eq!(cube_identity_d(4).unwrap(), 2);
        let mut e12 = EchSequence::ellipsoid(rat_int(1), rat_int(2)).unwrap();
        let mut cube = EchSequence::polydisc(rat_int(1), rat_int(1)).unwrap();
        for k in 1..=200usize {
            let d = rat_int(cube_identity_d(k as u64).unwrap() as i64);
            assert_eq!(e12.entry(k).unwrap(), d);
            assert_eq!(cube.entry(k).unwrap(), d);
        }
    }

    /// Counting identity behind the closed form:
    /// #{(m,n) : m + 2n <= d} = floor((d+2)/2) * ceil((d+2)/2).
    #[test]
    fn lattice_counting_identity() {
        for d in 0..=60i64 {
            let mut count = 0i64;
            for m in 0..=d {
                for n in 0..=d {
                    if m + 2 * n <= d {
                        count += 1;
                    }
                }
            }
            assert_eq!(count, ((d + 2) / 2) * ((d + 2) - (d + 2) / 2));
        }
    }

    #[test]
    fn dominance_examples() {
        let mut ball = EchSequence::ellipsoid(rat_int(1), rat_int(1)).unwrap();
        let mut cube = EchSequence::polydisc(rat_int(1), rat_int(1)).unwrap();
        assert_eq!(dominates(&mut ball, &mut cube, 50), Dominance::DominatedUpTo(50));

        let mut fat = EchSequence::ellipsoid(rat_int(1), rat_int(4)).unwrap();
        let mut cube = EchSequence::polydisc(rat_int(1), rat_int(1)).unwrap();
        match dominates(&mut fat, &mut cube, 10) {
            Dominance::ViolatedAt(k) => assert!(k <= 10),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn symmetry_and_scaling(
            an in 1i64..8, ad in 1i64..4,
            bn in 1i64..8, bd in 1i64..4,
            ln in 1i64..5, ld in 1i64..5,
            k in 1usize..40,
        ) {
            let a = rat(an, ad);
            let b = rat(bn, bd);
            let lambda = rat(ln, ld);
            let lhs = ech_ellipsoid(&a, &b, k).unwrap();
            prop_assert_eq!(lhs.clone(), ech_ellipsoid(&b, &a, k).unwrap());
            prop_assert_eq!(
                ech_ellipsoid(&(&a * &lambda), &(&b * &lambda), k).unwrap(),
                lhs * &lambda
            );
            let lhs = ech_polydisc(&a, &b, k).unwrap();
            prop_assert_eq!(
                ech_polydisc(&(&a * &lambda), &(&b * &lambda), k).unwrap(),
                lhs * &lambda
            );
        }
    }
}
