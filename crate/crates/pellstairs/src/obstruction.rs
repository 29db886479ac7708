//! The obstruction functional `mu(d,e;m)(a)`, exact obstructiveness tests,
//! error-vector statistics, and the analytic degree bounds that make the
//! searches finite.

use crate::exactnum::{ceil_sqrt, cmp_rational_vs_sqrt, sqrt_bounds, QuadExt, Rational};
use crate::exclass::ExClass;
use crate::weights::{length, scalar_product, weight_expansion};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// How many decimal digits of slack the directed roundings in the mixed
/// degree bounds are allowed; the bounds only ever widen, never shrink.
const BOUND_DIGITS: u32 = 40;

/// The constraint `mu` together with the volume bound at the same point.
#[derive(Clone, Debug)]
pub struct Obstruction {
    pub cls: ExClass,
    pub a: Rational,
    pub mu: Rational,
    /// `sqrt(a/2)` as an exact element of `Q(sqrt(2a))`.
    pub volume_bound: QuadExt,
}

/// `sqrt(a/2)` = `sqrt(2a)/2`.
pub fn volume_bound(a: &Rational) -> QuadExt {
    QuadExt::new(
        Rational::zero(),
        Rational::new(BigInt::one(), BigInt::from(2)),
        a * Rational::from_integer(BigInt::from(2)),
    )
    .expect("2a >= 0")
}

/// `mu(d,e;m)(a) = <m, w(a)> / (d + e)`, exact and symmetric in `(d, e)`.
/// The sentinel class contributes the vacuous constraint 0.
pub fn mu(cls: &ExClass, a: &Rational) -> Result<Rational> {
    if cls.is_sentinel() {
        return Ok(Rational::zero());
    }
    let de = cls.degree_sum();
    if de.is_zero() {
        return Err(Error::Domain(format!("mu of {cls} with d + e = 0")));
    }
    let w = weight_expansion(a)?;
    Ok(scalar_product(cls.m(), &w) / de)
}

/// Exact comparison `mu^2 > a/2`.
pub fn is_obstructive(cls: &ExClass, a: &Rational) -> Result<bool> {
    let half_a = a / Rational::from_integer(BigInt::from(2));
    Ok(cmp_rational_vs_sqrt(&mu(cls, a)?, &half_a) == Ordering::Greater)
}

pub fn eval(cls: &ExClass, a: &Rational) -> Result<Obstruction> {
    Ok(Obstruction {
        cls: cls.clone(),
        a: a.clone(),
        mu: mu(cls, a)?,
        volume_bound: volume_bound(a),
    })
}

/// Aggregate statistics of the error vector
/// `eps = m - (d+e)/sqrt(2a) * w(a)`, kept in the single field
/// `Q(sqrt(2a))`; individual components are never materialized.
#[derive(Clone, Debug)]
pub struct ErrorStats {
    pub cls: ExClass,
    pub a: Rational,
    pub sum_eps: QuadExt,
    pub sum_eps_sq: QuadExt,
}

/// Closed forms for the error-vector aggregates:
/// `-sum eps_i = (d+e)/sqrt(2a) (y(a) - 1/q) + 1` with
/// `y(a) = a + 1 - 2 sqrt(2a)`, and
/// `<eps,eps> = sum m_i^2 + (d+e)^2/2 - 2(d+e)<m,w>/sqrt(2a)`.
pub fn error_stats(cls: &ExClass, a: &Rational) -> Result<ErrorStats> {
    if a < &Rational::one() {
        return Err(Error::Domain(format!("error_stats needs a >= 1, got {a}")));
    }
    let two = Rational::from_integer(BigInt::from(2));
    let two_a = a * &two;
    let de = cls.degree_sum();
    let q = Rational::from_integer(a.denom().clone());
    let w = weight_expansion(a)?;
    let dot = scalar_product(cls.m(), &w);

    // (d+e)/sqrt(2a) = (d+e) sqrt(2a) / (2a)
    let de_over_sqrt = QuadExt::new(Rational::zero(), &de / &two_a, two_a.clone())?;
    let y = QuadExt::new(a + Rational::one(), -two.clone(), two_a.clone())?;
    let delta = y.sub(&QuadExt::rational(q.recip()));
    let neg_sum = de_over_sqrt.mul(&delta).add(&QuadExt::rational(Rational::one()));
    let sum_eps = neg_sum.neg();

    let sum_sq_rational =
        Rational::from_integer(cls.sum_m_squares()) + &de * &de / &two;
    let cross = QuadExt::new(Rational::zero(), -(&de * &dot / a), two_a)?;
    let sum_eps_sq = QuadExt::rational(sum_sq_rational).add(&cross);

    Ok(ErrorStats {
        cls: cls.clone(),
        a: a.clone(),
        sum_eps,
        sum_eps_sq,
    })
}

/// Which analytic degree bound applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `sigma^2 < a <= 6`: bounds classes whose constraint exceeds
    /// `(a+1)/4` via `d < 2 sqrt(a) / sqrt(a^2 - 6a + 1)`.
    Staircase,
    /// `6 < a < 8`: bounds classes obstructive at `a` with `l(m) = l(a)`
    /// through the error-vector sum.
    Interval6,
    /// `a >= 225/32`: `d <= 13`, and no classes at all for `a >= 8`.
    Above7,
}

/// A safe integer ceiling of the applicable degree bound: no class of the
/// kind the regime covers has larger `d` (with the half-integer shift for
/// `(d, d-1)` pairs already folded in).
pub fn d_upper_bound(a: &Rational, regime: Regime) -> Result<u64> {
    match regime {
        Regime::Staircase => staircase_bound(a),
        Regime::Interval6 => interval6_bound(a),
        Regime::Above7 => above7_bound(a),
    }
}

fn sigma_squared() -> QuadExt {
    QuadExt::new(
        Rational::from_integer(BigInt::from(3)),
        Rational::from_integer(BigInt::from(2)),
        Rational::from_integer(BigInt::from(2)),
    )
    .expect("radicand 2")
}

/// `a > sigma^2`, decided exactly (`a > 3` and `(a-3)^2 > 8`).
pub fn above_sigma_squared(a: &Rational) -> bool {
    QuadExt::rational(a.clone()).sub(&sigma_squared()).sign() > 0
}

fn staircase_bound(a: &Rational) -> Result<u64> {
    let six = Rational::from_integer(BigInt::from(6));
    let disc = a * a - &six * a + Rational::one();
    if !disc.is_positive() || a > &six {
        return Err(Error::BoundUnavailable(format!(
            "a^2 - 6a + 1 <= 0 at a = {a}: the bound is vacuous below sigma^2"
        )));
    }
    let four_a = a * Rational::from_integer(BigInt::from(4));
    let d_equal = ceil_sqrt(&(&four_a / &disc));
    // (d + 1/2, d - 1/2): d < sqrt(2a)/sqrt(disc); the larger integer of the
    // pair is at most ceil(sqrt(2a/disc) + 1/2).
    let two_a_over = a * Rational::from_integer(BigInt::from(2)) / &disc;
    let d_half = smallest_n_with_odd_square_at_least(&two_a_over);
    Ok(to_u64(d_equal.max(d_half)))
}

/// Smallest `n >= 1` with `(2n - 1)^2 >= x`: the odd number `2n - 1` must
/// reach `ceil(sqrt(x))`.
fn smallest_n_with_odd_square_at_least(x: &Rational) -> BigInt {
    if !x.is_positive() {
        return BigInt::one();
    }
    let s: BigInt = ceil_sqrt(x);
    ((s + BigInt::from(2)) / BigInt::from(2)).max(BigInt::one())
}

fn to_u64(x: BigInt) -> u64 {
    x.to_u64().expect("degree bound fits in u64")
}

fn interval6_bound(a: &Rational) -> Result<u64> {
    if !above_sigma_squared(a) || a >= &Rational::from_integer(BigInt::from(8)) {
        return Err(Error::BoundUnavailable(format!(
            "interval bound needs sigma^2 < a < 8, got {a}"
        )));
    }
    let q = Rational::from_integer(a.denom().clone());
    let two = Rational::from_integer(BigInt::from(2));
    let two_a = a * &two;
    // delta = y(a) - 1/q with y(a) = a + 1 - 2 sqrt(2a).
    let delta = QuadExt::new(a + Rational::one() - q.recip(), -two.clone(), two_a.clone())?;
    let (sqrt2a_lo, sqrt2a_hi) = sqrt_bounds(&two_a, BOUND_DIGITS);
    let rational_head = a + Rational::one() - q.recip();
    match delta.sign() {
        0 => Err(Error::BoundUnavailable(format!(
            "y(a) = 1/q exactly at a = {a}; no error-sum bound exists"
        ))),
        1 => {
            // d <= sqrt(a)/(sqrt(2) delta) (sqrt(q) - 1), both class shapes;
            // add 1/2 before rounding for the (d, d-1) pairs.
            let delta_lo = &rational_head - &two * &sqrt2a_hi;
            debug_assert!(delta_lo.is_positive());
            let (_, sqrt_a_hi) = sqrt_bounds(a, BOUND_DIGITS);
            let (_, sqrt_q_hi) = sqrt_bounds(&q, BOUND_DIGITS);
            let (sqrt2_lo, _) = sqrt_bounds(&two, BOUND_DIGITS);
            let bound = sqrt_a_hi * (sqrt_q_hi - Rational::one()) / (sqrt2_lo * delta_lo);
            Ok(to_u64(ceil_to_int_plus_half(&bound)))
        }
        _ => {
            // y(a) < 1/q: from |sum eps| <= sqrt(M <eps,eps>) < sqrt(M) and
            // -sum eps = (d+e)/sqrt(2a) delta + 1,
            // (d+e) |delta| / sqrt(2a) <= 1 + sqrt(M).
            let abs_delta_lo = &two * &sqrt2a_lo - &rational_head;
            if !abs_delta_lo.is_positive() {
                return Err(Error::BoundUnavailable(format!(
                    "cannot separate y(a) from 1/q at a = {a}"
                )));
            }
            let m_len = Rational::from_integer(BigInt::from(length(a)?));
            let (_, sqrt_m_hi) = sqrt_bounds(&m_len, BOUND_DIGITS);
            let degree_sum = sqrt2a_hi * (Rational::one() + sqrt_m_hi) / abs_delta_lo;
            // (d,d): d <= degree_sum/2; (d,d-1): d <= (degree_sum+1)/2.
            let bound = (degree_sum + Rational::one()) / &two;
            Ok(to_u64(ceil_to_int(&bound)))
        }
    }
}

fn ceil_to_int(x: &Rational) -> BigInt {
    crate::exactnum::ceil_to_int(x)
}

fn ceil_to_int_plus_half(x: &Rational) -> BigInt {
    ceil_to_int(&(x + Rational::new(BigInt::one(), BigInt::from(2))))
}

fn above7_bound(a: &Rational) -> Result<u64> {
    let eight = Rational::from_integer(BigInt::from(8));
    let lower = Rational::new(BigInt::from(225), BigInt::from(32));
    if a >= &eight {
        Ok(0)
    } else if a >= &lower {
        Ok(13)
    } else {
        Err(Error::BoundUnavailable(format!(
            "the flat bound applies only above 225/32, got {a}"
        )))
    }
}

/// Degree bound for classes that could strictly exceed an attained value
/// `r > sqrt(a/2)`: from `mu <= sqrt(2de+1) sqrt(a) / (d+e)`, any class
/// beating `r` has `d` below the returned value. Returns `None` when
/// `r^2 <= a/2` (no margin to exploit).
pub fn beating_degree_bound(a: &Rational, r: &Rational) -> Option<u64> {
    let two = Rational::from_integer(BigInt::from(2));
    let g = &two * r * r / a - Rational::one();
    if !g.is_positive() {
        return None;
    }
    // (d,d): exceeding needs d^2 < 1/(2g); (d,d-1): (2d-1)^2 < 1/g.
    let d_equal = ceil_sqrt(&(&two * &g).recip());
    let d_half = smallest_n_with_odd_square_at_least(&g.recip());
    Some(to_u64(d_equal.max(d_half)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::exclass::{diophantine_ok, enumerate_e7, DEFAULT_MAX_STEPS};
    use crate::pell::{class_e_alpha, class_e_beta};
    use rand::{Rng, SeedableRng};

    fn cls(d: i64, e: i64, m: Vec<i64>) -> ExClass {
        ExClass::new_int(d, e, m)
    }

    #[test]
    fn mu_examples() {
        let c = cls(2, 2, vec![2, 1, 1, 1, 1, 1]);
        assert_eq!(mu(&c, &rat(35, 6)).unwrap(), rat(41, 24));
        // (a+1)/4 on the whole interval.
        for a in [rat(35, 6), rat(59, 10), rat(6, 1)] {
            assert_eq!(mu(&c, &a).unwrap(), (&a + rat(1, 1)) / rat(4, 1));
        }
        let c = cls(4, 4, vec![3, 2, 2, 2, 2, 2, 2]);
        assert_eq!(mu(&c, &rat(7, 1)).unwrap(), rat(15, 8));
        let c = cls(1, 0, vec![1]);
        for a in [rat(1, 1), rat(5, 2), rat(7, 1)] {
            assert_eq!(mu(&c, &a).unwrap(), rat(1, 1));
        }
        assert_eq!(mu(&ExClass::sentinel(), &rat(3, 1)).unwrap(), rat(0, 1));
        assert!(mu(&cls(0, 0, vec![1]), &rat(3, 1)).is_err());
    }

    #[test]
    fn obstructive_examples() {
        assert!(is_obstructive(&cls(2, 2, vec![2, 1, 1, 1, 1, 1]), &rat(6, 1)).unwrap());
        assert!(!is_obstructive(&cls(4, 4, vec![3, 2, 2, 2, 2, 2, 2]), &rat(8, 1)).unwrap());
        assert!(!is_obstructive(&ExClass::sentinel(), &rat(5, 1)).unwrap());
    }

    /// Componentwise evaluation of eps in Q(sqrt(2a)) as the oracle for the
    /// closed-form aggregates.
    fn stats_oracle(c: &ExClass, a: &Rational) -> (QuadExt, QuadExt) {
        let two_a = a * rat(2, 1);
        let w = weight_expansion(a).unwrap();
        let de = c.degree_sum();
        let len = c.m().len().max(w.len());
        let mut sum = QuadExt::zero();
        let mut sum_sq = QuadExt::zero();
        for i in 0..len {
            let mi = c
                .m()
                .get(i)
                .cloned()
                .map(Rational::from_integer)
                .unwrap_or_else(Rational::zero);
            let wi = w.entries().get(i).cloned().unwrap_or_else(Rational::zero);
            // eps_i = m_i - (d+e) w_i / sqrt(2a)
            let eps = QuadExt::new(mi, -(&de * &wi / &two_a), two_a.clone()).unwrap();
            sum = sum.add(&eps);
            sum_sq = sum_sq.add(&eps.square());
        }
        (sum, sum_sq)
    }

    #[test]
    fn error_stats_closed_forms() {
        // E(beta_1) at a = 5: <eps,eps> = 19/2 - 3 sqrt(10).
        let c = cls(2, 1, vec![1, 1, 1, 1, 1]);
        let stats = error_stats(&c, &rat(5, 1)).unwrap();
        let expected = QuadExt::new(rat(19, 2), rat(-3, 1), rat(10, 1)).unwrap();
        assert_eq!(stats.sum_eps_sq, expected);

        // (1,1;1^3) at a = 3: <eps,eps> = 5 - 2 sqrt(6).
        let c = cls(1, 1, vec![1, 1, 1]);
        let stats = error_stats(&c, &rat(3, 1)).unwrap();
        let expected = QuadExt::new(rat(5, 1), rat(-2, 1), rat(6, 1)).unwrap();
        assert_eq!(stats.sum_eps_sq, expected);

        // m exactly proportional to w(a) with rational scale factor:
        // both aggregates collapse to rationals.
        // At a = 2, w = (1,1) and (d+e)/sqrt(2a) = (d+e)/2.
        let c = cls(1, 1, vec![1, 1]);
        let stats = error_stats(&c, &rat(2, 1)).unwrap();
        assert!(stats.sum_eps.is_rational());
        assert!(stats.sum_eps_sq.is_rational());
        assert_eq!(stats.sum_eps_sq, QuadExt::rational(rat(0, 1)));
    }

    #[test]
    fn error_stats_match_componentwise_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut cases: Vec<(ExClass, Rational)> = Vec::new();
        for c in enumerate_e7(DEFAULT_MAX_STEPS) {
            if c.is_sentinel() {
                continue;
            }
            for _ in 0..4 {
                let q = rng.gen_range(1i64..12);
                let p = rng.gen_range(q..8 * q);
                cases.push((c.clone(), rat(p, q)));
            }
        }
        cases.push((class_e_beta(2).unwrap(), rat(17, 3)));
        cases.push((class_e_alpha(2).unwrap(), rat(50, 9)));
        for (c, a) in cases {
            let stats = error_stats(&c, &a).unwrap();
            let (sum, sum_sq) = stats_oracle(&c, &a);
            assert_eq!(stats.sum_eps, sum, "sum mismatch for {c} at {a}");
            assert_eq!(stats.sum_eps_sq, sum_sq, "square mismatch for {c} at {a}");
        }
    }

    /// mu <= sqrt(2de+1) sqrt(a)/(d+e), squared to stay rational, and
    /// <eps, w(a)> > 0 iff the class is obstructive.
    #[test]
    fn first_properties_of_mu() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let classes = enumerate_e7(DEFAULT_MAX_STEPS);
        for _ in 0..200 {
            let c = &classes[rng.gen_range(0..classes.len())];
            if c.is_sentinel() {
                continue;
            }
            let q = rng.gen_range(1i64..15);
            let p = rng.gen_range(q..8 * q);
            let a = rat(p, q);
            let m = mu(c, &a).unwrap();
            let de = c.degree_sum();
            let cauchy =
                Rational::from_integer(c.sum_m_squares()) * &a / (&de * &de);
            assert!(&m * &m <= cauchy, "Cauchy-Schwarz bound violated for {c} at {a}");

            let w = weight_expansion(&a).unwrap();
            let dot = scalar_product(c.m(), &w);
            let two_a = &a * rat(2, 1);
            // <eps, w> = <m, w> - (d+e) sqrt(a/2)
            let eps_dot =
                QuadExt::new(dot, -(&de / rat(2, 1)), two_a).unwrap();
            assert_eq!(
                eps_dot.sign() > 0,
                is_obstructive(c, &a).unwrap(),
                "error-vector sign test failed for {c} at {a}"
            );
        }
    }

    /// For obstructive classes, <eps,eps> < 1 when e = d and < 1/2 when
    /// e = d - 1.
    #[test]
    fn obstructive_eps_norm_bounds() {
        let table: Vec<ExClass> = vec![
            cls(2, 2, vec![2, 1, 1, 1, 1, 1]),
            cls(4, 4, vec![3, 2, 2, 2, 2, 2, 2]),
            cls(7, 7, vec![4, 4, 4, 4, 4, 4, 1, 1, 1]),
            cls(11, 10, vec![6, 6, 6, 6, 6, 6, 1, 1, 1, 1, 1]),
        ];
        let points = [rat(6, 1), rat(7, 1), rat(19, 3), rat(31, 5)];
        for (c, x) in table.iter().zip(points.iter()) {
            assert!(diophantine_ok(c));
            assert!(is_obstructive(c, x).unwrap());
            let stats = error_stats(c, x).unwrap();
            let cap = if c.d() == c.e() { rat(1, 1) } else { rat(1, 2) };
            let diff = QuadExt::rational(cap).sub(&stats.sum_eps_sq);
            assert_eq!(diff.sign(), 1, "eps norm bound failed for {c} at {x}");
        }
    }

    #[test]
    fn degree_bound_examples() {
        assert_eq!(d_upper_bound(&rat(225, 32), Regime::Above7).unwrap(), 13);
        assert_eq!(d_upper_bound(&rat(15, 2), Regime::Above7).unwrap(), 13);
        assert_eq!(d_upper_bound(&rat(9, 1), Regime::Above7).unwrap(), 0);
        assert!(d_upper_bound(&rat(5, 1), Regime::Staircase).is_err());
        // At a = 6: d < 2 sqrt(6)/sqrt(1) ~ 4.9.
        assert_eq!(d_upper_bound(&rat(6, 1), Regime::Staircase).unwrap(), 5);
        // Interval bounds must clear the classes they are meant to capture.
        assert!(d_upper_bound(&rat(43, 7), Regime::Interval6).unwrap() >= 196);
        assert!(d_upper_bound(&rat(37, 6), Regime::Interval6).unwrap() >= 84);
        assert!(d_upper_bound(&rat(13, 2), Regime::Interval6).unwrap() >= 9);
        assert!(d_upper_bound(&rat(7, 1), Regime::Interval6).unwrap() >= 4);
        // y(49/8) = 1/8 exactly: no bound.
        assert!(d_upper_bound(&rat(49, 8), Regime::Interval6).is_err());
    }

    #[test]
    fn beating_bound_sane() {
        // Nothing above the volume curve can be certified.
        assert!(beating_degree_bound(&rat(6, 1), &rat(1, 1)).is_none());
        // At a = 6 the value 7/4 beats sqrt(3); classes above it have small d.
        let bound = beating_degree_bound(&rat(6, 1), &rat(7, 4)).unwrap();
        assert!((2..=20).contains(&bound), "bound {bound} out of range");
    }

    #[test]
    fn sigma_squared_test_is_exact() {
        assert!(!above_sigma_squared(&rat(5, 1)));
        assert!(!above_sigma_squared(&rat(29, 5)));
        assert!(above_sigma_squared(&rat(35, 6)));
        assert!(above_sigma_squared(&rat(6, 1)));
    }
}
