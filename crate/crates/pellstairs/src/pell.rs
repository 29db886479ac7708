//! Pell and half-companion Pell numbers, the staircase parameters
//! `alpha_n` and `beta_n`, the convergents and special points of the
//! interval above `sigma^2`, and the constructors of the named exceptional
//! classes attached to them.

use crate::exactnum::Rational;
use crate::exclass::ExClass;
use crate::weights::weight_expansion;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// `(P_n, H_n)` with `P_0 = 0, P_1 = 1, P_n = 2P_{n-1} + P_{n-2}` and
/// `H_0 = H_1 = 1, H_n = 2H_{n-1} + H_{n-2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PellPair {
    pub n: u32,
    pub p: BigInt,
    pub h: BigInt,
}

pub fn pell(n: u32) -> PellPair {
    let mut p = (BigInt::zero(), BigInt::one());
    let mut h = (BigInt::one(), BigInt::one());
    if n == 0 {
        return PellPair { n, p: p.0, h: h.0 };
    }
    for _ in 1..n {
        p = (p.1.clone(), &p.1 * 2 + &p.0);
        h = (h.1.clone(), &h.1 * 2 + &h.0);
    }
    PellPair { n, p: p.1, h: h.1 }
}

fn p_num(n: u32) -> BigInt {
    pell(n).p
}

fn h_num(n: u32) -> BigInt {
    pell(n).h
}

/// `alpha_n`: `2 P_{n+1}^2 / H_n^2` for even `n`, `H_{n+1}^2 / (2 P_n^2)`
/// for odd `n`. Always in lowest terms.
pub fn alpha(n: u32) -> Rational {
    if n.is_multiple_of(2) {
        let p = p_num(n + 1);
        let h = h_num(n);
        Rational::new(&p * &p * 2, &h * &h)
    } else {
        let h = h_num(n + 1);
        let p = p_num(n);
        Rational::new(&h * &h, &p * &p * 2)
    }
}

/// `beta_n`: `H_{n+2}/H_n` for even `n`, `P_{n+2}/P_n` for odd `n`.
pub fn beta(n: u32) -> Rational {
    if n.is_multiple_of(2) {
        Rational::new(h_num(n + 2), h_num(n))
    } else {
        Rational::new(p_num(n + 2), p_num(n))
    }
}

/// Which distinguished point of the region above `sigma^2` (or of the
/// staircase) a [`StairPoint`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StairKind {
    Alpha { n: u32 },
    Beta { n: u32 },
    /// Odd convergent `c_{2k-1}` of `sigma^2`.
    COdd { k: u32 },
    U { k: u32, j: u32 },
    V { k: u32, j: u32 },
    B { k: u32, i: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StairPoint {
    pub kind: StairKind,
    pub value: Rational,
}

/// Closed-form value of a staircase point. The defining continued-fraction
/// patterns are kept in the test suite as the independent oracle.
pub fn stair_point(kind: StairKind) -> Result<StairPoint> {
    let value = match kind {
        StairKind::Alpha { n } => alpha(n),
        StairKind::Beta { n } => beta(n),
        StairKind::COdd { k } => {
            require(k >= 1, "c_{2k-1} needs k >= 1")?;
            Rational::new(p_num(2 * k + 2), p_num(2 * k))
        }
        StairKind::U { k, j } => {
            require(k >= 1 && j >= 1, "u_k(j) needs k, j >= 1")?;
            let j = BigInt::from(j);
            Rational::new(
                &j * p_num(2 * k + 4) + p_num(2 * k + 2),
                &j * p_num(2 * k + 2) + p_num(2 * k),
            )
        }
        StairKind::V { k, j } => {
            require(k >= 1 && j >= 1, "v_k(j) needs k, j >= 1")?;
            let j = BigInt::from(j);
            Rational::new(
                &j * p_num(2 * k + 2) + p_num(2 * k + 1) * 2,
                &j * p_num(2 * k) + p_num(2 * k - 1) * 2,
            )
        }
        StairKind::B { k, i } => {
            require(k >= 1, "b_k(i) needs k >= 1")?;
            return Ok(StairPoint {
                kind,
                value: stair_point(StairKind::V { k, j: 2 + 2 * i })?.value,
            });
        }
    };
    Ok(StairPoint { kind, value })
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg.to_string()))
    }
}

/// Entries of `q * w(a)` as exact integers.
fn scaled_weights(a: &Rational) -> Result<Vec<BigInt>> {
    let q = Rational::from_integer(a.denom().clone());
    let w = weight_expansion(a)?;
    w.entries()
        .iter()
        .map(|wi| {
            let v = wi * &q;
            if v.is_integer() {
                Ok(v.to_integer())
            } else {
                Err(Error::Domain(format!("q*w({a}) is not integral")))
            }
        })
        .collect()
}

/// The class `E(alpha_n) = (d, d; q_n w(alpha_n), 1)` with
/// `d = P_{n+1} H_n` (even `n`) or `P_n H_{n+1}` (odd `n`).
pub fn class_e_alpha(n: u32) -> Result<ExClass> {
    let a = alpha(n);
    let mut m = scaled_weights(&a)?;
    m.push(BigInt::one());
    m.sort_unstable_by(|x, y| y.cmp(x));
    let d = if n.is_multiple_of(2) {
        p_num(n + 1) * h_num(n)
    } else {
        p_num(n) * h_num(n + 1)
    };
    let d = Rational::from_integer(d);
    Ok(ExClass::new(d.clone(), d, m))
}

/// The class `E(beta_n) = (d, e; q_n w(beta_n))` with
/// `d = e = (H_n + H_{n+2})/4` for even `n` and
/// `(d, e) = ((P_n + P_{n+2})/4 + 1/2, (P_n + P_{n+2})/4 - 1/2)` for odd `n`.
pub fn class_e_beta(n: u32) -> Result<ExClass> {
    let a = beta(n);
    let mut m = scaled_weights(&a)?;
    m.sort_unstable_by(|x, y| y.cmp(x));
    let (d, e) = if n.is_multiple_of(2) {
        let s = h_num(n) + h_num(n + 2);
        let d = exact_quarter(&s)?;
        (d.clone(), d)
    } else {
        let s = p_num(n) + p_num(n + 2);
        (exact_quarter(&(&s + 2))?, exact_quarter(&(&s - 2))?)
    };
    Ok(ExClass::new(
        Rational::from_integer(d),
        Rational::from_integer(e),
        m,
    ))
}

fn exact_quarter(x: &BigInt) -> Result<BigInt> {
    let q = Rational::new(x.clone(), BigInt::from(4));
    if q.is_integer() {
        Ok(q.to_integer())
    } else {
        Err(Error::Domain(format!("{x} is not divisible by 4")))
    }
}

/// The class `E(b_k(i))`: `q w(b_k(i))` with the last block of ones
/// replaced by `(j+1, j, 1^{2j+1})` when `i = 2j` and by
/// `((j+1)^2, 1^{2j+2})` when `i = 2j+1`, paired with degree
/// `(p+q)/4` (split as `+-1/2` for odd `i`).
pub fn class_e_b(k: u32, i: u32) -> Result<ExClass> {
    let b = stair_point(StairKind::B { k, i })?.value;
    let mut m = scaled_weights(&b)?;
    // The last block of q w(b) consists of 2 + 2i ones.
    let ones = (2 + 2 * i) as usize;
    assert!(m.len() >= ones && m[m.len() - ones..].iter().all(|x| x.is_one()));
    m.truncate(m.len() - ones);
    let j = i / 2;
    if i.is_multiple_of(2) {
        m.push(BigInt::from(j + 1));
        m.push(BigInt::from(j));
        m.extend(std::iter::repeat_n(BigInt::one(), 2 * j as usize + 1));
    } else {
        m.push(BigInt::from(j + 1));
        m.push(BigInt::from(j + 1));
        m.extend(std::iter::repeat_n(BigInt::one(), 2 * j as usize + 2));
    }
    m.retain(|x| !x.is_zero());
    m.sort_unstable_by(|x, y| y.cmp(x));
    let sum = b.numer() + b.denom();
    let (d, e) = if i.is_multiple_of(2) {
        let d = exact_quarter(&sum)?;
        (d.clone(), d)
    } else {
        (exact_quarter(&(&sum + 2))?, exact_quarter(&(&sum - 2))?)
    };
    Ok(ExClass::new(
        Rational::from_integer(d),
        Rational::from_integer(e),
        m,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, QuadExt};
    use crate::exclass::{diophantine_ok, is_in_e, DEFAULT_MAX_STEPS};
    use rand::{Rng, SeedableRng};

    #[test]
    fn pell_examples() {
        let p4 = pell(4);
        assert_eq!((p4.p, p4.h), (BigInt::from(12), BigInt::from(17)));
        let p0 = pell(0);
        assert_eq!((p0.p, p0.h), (BigInt::from(0), BigInt::from(1)));
        assert_eq!(pell(10).p, BigInt::from(2378));
        for n in 1..=20 {
            assert_eq!(pell(n).h, pell(n).p + pell(n - 1).p);
        }
    }

    #[test]
    fn alpha_beta_examples() {
        assert_eq!(alpha(0), rat(2, 1));
        assert_eq!(beta(0), rat(3, 1));
        assert_eq!(alpha(1), rat(9, 2));
        assert_eq!(beta(1), rat(5, 1));
        assert_eq!(alpha(2), rat(50, 9));
        assert_eq!(beta(2), rat(17, 3));
        assert_eq!(alpha(5), rat(9801, 1682));
    }

    /// alpha_n < beta_n < alpha_{n+1}, both sequences increasing toward
    /// sigma^2 = 3 + 2 sqrt(2) with strictly shrinking gaps.
    #[test]
    fn interleaving_and_convergence() {
        let sigma_sq = QuadExt::new(rat(3, 1), rat(2, 1), rat(2, 1)).unwrap();
        let mut prev_alpha_gap: Option<QuadExt> = None;
        let mut prev_beta_gap: Option<QuadExt> = None;
        for n in 0..=10 {
            assert!(alpha(n) < beta(n));
            assert!(beta(n) < alpha(n + 1));
            let alpha_gap = sigma_sq.sub(&QuadExt::rational(alpha(n)));
            let beta_gap = sigma_sq.sub(&QuadExt::rational(beta(n)));
            assert_eq!(alpha_gap.sign(), 1, "alpha_{n} not below sigma^2");
            assert_eq!(beta_gap.sign(), 1, "beta_{n} not below sigma^2");
            if let Some(prev) = prev_alpha_gap {
                assert_eq!(prev.sub(&alpha_gap).sign(), 1);
            }
            if let Some(prev) = prev_beta_gap {
                assert_eq!(prev.sub(&beta_gap).sign(), 1);
            }
            prev_alpha_gap = Some(alpha_gap);
            prev_beta_gap = Some(beta_gap);
        }
    }

    /// Continued-fraction patterns, evaluated directly, as the independent
    /// oracle for the closed forms.
    fn eval_cf(terms: &[u64]) -> Rational {
        let mut it = terms.iter().rev();
        let mut acc = Rational::from_integer(BigInt::from(*it.next().unwrap()));
        for &t in it {
            acc = Rational::from_integer(BigInt::from(t)) + acc.recip();
        }
        acc
    }

    fn pattern(k: u32, tail: &[u64]) -> Vec<u64> {
        let mut t = vec![5];
        for _ in 0..k - 1 {
            t.push(1);
            t.push(4);
        }
        t.extend_from_slice(tail);
        t
    }

    #[test]
    fn stair_points_match_cf_patterns() {
        for k in 1..=5u32 {
            let c = stair_point(StairKind::COdd { k }).unwrap().value;
            assert_eq!(c, eval_cf(&pattern(k, &[1])));
            for j in 1..=8u32 {
                let u = stair_point(StairKind::U { k, j }).unwrap().value;
                assert_eq!(u, eval_cf(&pattern(k, &[1, 5, j as u64])));
                let v = stair_point(StairKind::V { k, j }).unwrap().value;
                assert_eq!(v, eval_cf(&pattern(k, &[1, j as u64])));
            }
        }
        // The canonical continued fraction of the value reproduces the
        // defining pattern whenever the pattern is already canonical.
        for k in 1..=4u32 {
            for j in 2..=6u64 {
                let v = stair_point(StairKind::V { k, j: j as u32 }).unwrap().value;
                let cf = crate::weights::continued_fraction(&v).unwrap();
                assert_eq!(cf.terms, pattern(k, &[1, j]));
            }
        }
    }

    #[test]
    fn stair_point_examples() {
        for k in 1..=6u32 {
            let u1 = stair_point(StairKind::U { k, j: 1 }).unwrap().value;
            let v6 = stair_point(StairKind::V { k, j: 6 }).unwrap().value;
            let b2 = stair_point(StairKind::B { k, i: 2 }).unwrap().value;
            assert_eq!(u1, v6);
            assert_eq!(u1, b2);
            let u2 = stair_point(StairKind::U { k, j: 2 }).unwrap().value;
            let v7 = stair_point(StairKind::V { k, j: 7 }).unwrap().value;
            assert!(u2 < u1 && u1 < v7);
        }
        assert_eq!(stair_point(StairKind::B { k: 1, i: 0 }).unwrap().value, beta(2));
        assert_eq!(
            stair_point(StairKind::B { k: 1, i: 2 }).unwrap().value,
            rat(41, 7)
        );
        assert!(stair_point(StairKind::U { k: 0, j: 1 }).is_err());
    }

    /// b_k(0) = beta_{2k} and b_k(1) = beta_{2k+1}.
    #[test]
    fn b_k_meets_beta() {
        for k in 1..=5u32 {
            assert_eq!(
                stair_point(StairKind::B { k, i: 0 }).unwrap().value,
                beta(2 * k)
            );
            assert_eq!(
                stair_point(StairKind::B { k, i: 1 }).unwrap().value,
                beta(2 * k + 1)
            );
        }
    }

    #[test]
    fn quadratic_identities() {
        // q^2 (u^2 - 6u + 1) = j^2 + 6j + 1 and
        // q^2 (v^2 - 6v + 1) = j^2 - 4j - 4, plus the fixed-j variants.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut pairs: Vec<(u32, u32)> = (1..=8).flat_map(|k| (1..=12).map(move |j| (k, j))).collect();
        for _ in 0..10 {
            pairs.push((rng.gen_range(1..=10), rng.gen_range(1..=20)));
        }
        for (k, j) in pairs {
            let u = stair_point(StairKind::U { k, j }).unwrap().value;
            let q = Rational::from_integer(u.denom().clone());
            let lhs = &q * &q * (&u * &u - rat(6, 1) * &u + rat(1, 1));
            assert_eq!(lhs, rat((j as i64) * (j as i64) + 6 * j as i64 + 1, 1));
            let v = stair_point(StairKind::V { k, j }).unwrap().value;
            let q = Rational::from_integer(v.denom().clone());
            let lhs = &q * &q * (&v * &v - rat(6, 1) * &v + rat(1, 1));
            assert_eq!(lhs, rat((j as i64) * (j as i64) - 4 * j as i64 - 4, 1));
        }
        for k in 1..=8u32 {
            let check = |pt: Rational, c1: i64, c2: i64, scale: i64| {
                let p = Rational::from_integer(pt.numer().clone());
                let q = Rational::from_integer(pt.denom().clone());
                let lhs = rat(scale, 1) * (&p * &p - rat(6, 1) * &p * &q + &q * &q) - rat(c1, 1);
                assert_eq!(lhs, rat(c2, 1));
            };
            check(stair_point(StairKind::U { k, j: 2 }).unwrap().value, 16, 1, 1);
            check(stair_point(StairKind::U { k, j: 3 }).unwrap().value, 12, 16, 1);
            check(stair_point(StairKind::V { k, j: 6 }).unwrap().value, 32, 8, 5);
            check(stair_point(StairKind::V { k, j: 7 }).unwrap().value, 28, 23, 3);
        }
    }

    /// P_{2m-k} = (-1)^{k+1} (P_k H_{2m} - H_k P_{2m}).
    #[test]
    fn pell_reflection_identity() {
        for m in 0..=12u32 {
            for k in 0..=2 * m {
                let lhs = p_num(2 * m - k);
                let rhs = p_num(k) * h_num(2 * m) - h_num(k) * p_num(2 * m);
                let rhs = if k % 2 == 0 { -rhs } else { rhs };
                assert_eq!(lhs, rhs, "m={m}, k={k}");
            }
        }
    }

    /// (2 H_n beta_n / (H_{n+2} + H_n))^2 = alpha_{n+1} / 2 for even n.
    #[test]
    fn beta_capacity_relation() {
        for n in (0..=10u32).step_by(2) {
            let hn = Rational::from_integer(h_num(n));
            let hn2 = Rational::from_integer(h_num(n + 2));
            let c = rat(2, 1) * &hn * beta(n) / (&hn2 + &hn);
            assert_eq!(&c * &c, alpha(n + 1) / rat(2, 1));
        }
    }

    #[test]
    fn class_examples() {
        assert_eq!(
            class_e_alpha(2).unwrap(),
            ExClass::new_int(15, 15, vec![9, 9, 9, 9, 9, 5, 4, 1, 1, 1, 1, 1])
        );
        assert_eq!(
            class_e_alpha(0).unwrap(),
            ExClass::new_int(1, 1, vec![1, 1, 1])
        );
        assert_eq!(
            class_e_alpha(1).unwrap(),
            ExClass::new_int(3, 3, vec![2, 2, 2, 2, 1, 1, 1])
        );
        assert_eq!(
            class_e_alpha(3).unwrap(),
            ExClass::new_int(
                85,
                85,
                vec![50, 50, 50, 50, 50, 39, 11, 11, 11, 6, 5, 1, 1, 1, 1, 1, 1]
            )
        );
        assert_eq!(
            class_e_beta(1).unwrap(),
            ExClass::new_int(2, 1, vec![1, 1, 1, 1, 1])
        );
        assert_eq!(
            class_e_beta(2).unwrap(),
            ExClass::new_int(5, 5, vec![3, 3, 3, 3, 3, 2, 1, 1])
        );
        assert_eq!(
            class_e_beta(3).unwrap(),
            ExClass::new_int(9, 8, vec![5, 5, 5, 5, 5, 4, 1, 1, 1, 1])
        );
        assert_eq!(
            class_e_b(1, 2).unwrap(),
            ExClass::new_int(12, 12, vec![7, 7, 7, 7, 7, 6, 2, 1, 1, 1, 1])
        );
        // b_k(0) and b_k(1) reproduce the beta classes.
        for k in 1..=4 {
            assert_eq!(class_e_b(k, 0).unwrap(), class_e_beta(2 * k).unwrap());
            assert_eq!(class_e_b(k, 1).unwrap(), class_e_beta(2 * k + 1).unwrap());
        }
    }

    #[test]
    fn constructed_classes_are_exceptional() {
        for n in 0..=6 {
            let a = class_e_alpha(n).unwrap();
            assert!(diophantine_ok(&a), "E(alpha_{n}) fails Diophantine");
            assert!(is_in_e(&a, DEFAULT_MAX_STEPS), "E(alpha_{n}) fails reduction");
            let b = class_e_beta(n).unwrap();
            assert!(diophantine_ok(&b), "E(beta_{n}) fails Diophantine");
            assert!(is_in_e(&b, DEFAULT_MAX_STEPS), "E(beta_{n}) fails reduction");
        }
        for k in 1..=5 {
            for i in 0..=6 {
                let c = class_e_b(k, i).unwrap();
                assert!(diophantine_ok(&c), "E(b_{k}({i})) fails Diophantine");
                assert!(is_in_e(&c, DEFAULT_MAX_STEPS), "E(b_{k}({i})) fails reduction");
            }
        }
    }

    /// The alpha-class ladder: each extra level costs 4 + 5 = 9 moves
    /// (four to collapse a step, five to descend the remainder), on top of
    /// the fixed 16-move base for even indices (V^2 alone takes 8).
    #[test]
    fn alpha_family_reduction_move_counts() {
        use crate::exclass::{phi_star, reduces_to_minus_one};
        let count = |n: u32| {
            let cls = class_e_alpha(n).unwrap();
            let tr = reduces_to_minus_one(&phi_star(&cls).unwrap(), DEFAULT_MAX_STEPS);
            assert!(tr.reduced());
            tr.move_count()
        };
        assert_eq!(count(0), 1);
        assert_eq!(count(1), 3);
        assert_eq!(count(2), 7);
        for m in 2..=5u32 {
            assert_eq!(count(2 * m), (9 * m - 2) as usize, "even ladder at m={m}");
            assert_eq!(count(2 * m - 1), (9 * m - 6) as usize, "odd ladder at m={m}");
        }
    }

    /// Consecutive k-levels of the b-family differ by exactly 4 Cremona
    /// moves after the basis change.
    #[test]
    fn b_family_reduces_in_four_moves_per_level() {
        use crate::exclass::{phi_star, reduces_to_minus_one};
        for i in 0..=3u32 {
            let mut prev: Option<usize> = None;
            for k in 1..=4u32 {
                let cls = class_e_b(k, i).unwrap();
                let trace =
                    reduces_to_minus_one(&phi_star(&cls).unwrap(), DEFAULT_MAX_STEPS);
                assert!(trace.reduced(), "E(b_{k}({i})) stuck");
                if let Some(p) = prev {
                    assert_eq!(trace.move_count() - p, 4, "level gap at k={k}, i={i}");
                }
                prev = Some(trace.move_count());
            }
        }
    }

    /// b_1(2j) = (24j + 17)/(4j + 3).
    #[test]
    fn b1_closed_form() {
        for j in 0..=6i64 {
            assert_eq!(
                stair_point(StairKind::B { k: 1, i: 2 * j as u32 }).unwrap().value,
                rat(24 * j + 17, 4 * j + 3)
            );
        }
    }
}
