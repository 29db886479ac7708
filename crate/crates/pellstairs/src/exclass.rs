//! Exceptional-class algebra: Diophantine membership conditions, the basis
//! change between the `S^2 x S^2` and `CP^2` bases, Cremona moves, full
//! reduction to `(0;-1)`, and positivity of intersections.

use crate::exactnum::Rational;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Step cap for Cremona reductions: `PELLSTAIRS_MAX_STEPS` if set, else
/// [`DEFAULT_MAX_STEPS`]. Read once.
pub fn max_steps() -> usize {
    static CAP: std::sync::OnceLock<usize> = std::sync::OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("PELLSTAIRS_MAX_STEPS")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(DEFAULT_MAX_STEPS)
    })
}

/// A candidate or verified exceptional class `(d, e; m_1, ..., m_M)` in the
/// `S^2 x S^2` basis, normalized so that `d >= e`.
///
/// `d` and `e` are carried as rationals so the half-integer bookkeeping of
/// the degree bounds can be written verbatim; every class that occurs in
/// practice has integer entries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExClass {
    d: Rational,
    e: Rational,
    m: Vec<BigInt>,
}

impl ExClass {
    pub fn new(d: Rational, e: Rational, m: Vec<BigInt>) -> Self {
        let (d, e) = if d >= e { (d, e) } else { (e, d) };
        ExClass { d, e, m }
    }

    pub fn new_int(d: i64, e: i64, m: Vec<i64>) -> Self {
        ExClass::new(
            Rational::from_integer(BigInt::from(d)),
            Rational::from_integer(BigInt::from(e)),
            m.into_iter().map(BigInt::from).collect(),
        )
    }

    /// The class `(0, 0; -1)` that seeds the whole hierarchy.
    pub fn sentinel() -> Self {
        ExClass {
            d: Rational::zero(),
            e: Rational::zero(),
            m: vec![BigInt::from(-1)],
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.d.is_zero() && self.e.is_zero() && self.m == [BigInt::from(-1)]
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    pub fn e(&self) -> &Rational {
        &self.e
    }

    pub fn m(&self) -> &[BigInt] {
        &self.m
    }

    pub fn degree_sum(&self) -> Rational {
        &self.d + &self.e
    }

    pub fn sum_m(&self) -> BigInt {
        self.m.iter().sum()
    }

    pub fn sum_m_squares(&self) -> BigInt {
        self.m.iter().map(|x| x * x).sum()
    }
}

/// Renders a multiplicity vector in the compressed form `3,2^6,1^2`.
fn fmt_multiplicities(m: &[BigInt], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut i = 0;
    let mut first = true;
    while i < m.len() {
        let mut j = i;
        while j < m.len() && m[j] == m[i] {
            j += 1;
        }
        if !first {
            write!(f, ",")?;
        }
        first = false;
        if j - i == 1 {
            write!(f, "{}", m[i])?;
        } else {
            write!(f, "{}^{}", m[i], j - i)?;
        }
        i = j;
    }
    Ok(())
}

impl fmt::Display for ExClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};", self.d, self.e)?;
        fmt_multiplicities(&self.m, f)?;
        write!(f, ")")
    }
}

/// A class `(d; m)` in the blown-up `CP^2` basis. `-1` entries occur only
/// in the terminal state of a reduction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cp2Class {
    pub d: BigInt,
    pub m: Vec<BigInt>,
}

impl Cp2Class {
    pub fn new(d: i64, m: Vec<i64>) -> Self {
        Cp2Class {
            d: BigInt::from(d),
            m: m.into_iter().map(BigInt::from).collect(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.d.is_zero() && self.m == [BigInt::from(-1)]
    }

    fn normalized(mut self) -> Self {
        self.m.sort_unstable_by(|a, b| b.cmp(a));
        self.m.retain(|x| !x.is_zero());
        self
    }
}

impl fmt::Display for Cp2Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.d)?;
        fmt_multiplicities(&self.m, f)?;
        write!(f, ")")
    }
}

/// Both Diophantine equations of membership: `sum m_i = 2(d+e) - 1` and
/// `sum m_i^2 = 2de + 1`, evaluated in exact rational arithmetic so that
/// half-integer `(d, e)` pairs are handled verbatim.
pub fn diophantine_ok(c: &ExClass) -> bool {
    let sum = Rational::from_integer(c.sum_m());
    let sum_sq = Rational::from_integer(c.sum_m_squares());
    let two = Rational::from_integer(BigInt::from(2));
    sum == &two * c.degree_sum() - Rational::one()
        && sum_sq == &two * (c.d() * c.e()) + Rational::one()
}

/// Basis change to the `CP^2` basis:
/// `(d, e; m) -> (d + e - m1; d - m1, e - m1, m2, ..., mM)`,
/// sorted nonincreasing with zero entries dropped.
pub fn phi_star(c: &ExClass) -> Result<Cp2Class> {
    let m1 = c
        .m()
        .first()
        .ok_or_else(|| Error::NonIntegralClass(format!("{c} has empty m")))?;
    let m1r = Rational::from_integer(m1.clone());
    let to_int = |x: Rational| -> Result<BigInt> {
        if x.is_integer() {
            Ok(x.to_integer())
        } else {
            Err(Error::NonIntegralClass(format!(
                "phi_star of {c} produces non-integer {x}"
            )))
        }
    };
    let d = to_int(c.degree_sum() - &m1r)?;
    let mut m = vec![to_int(c.d() - &m1r)?, to_int(c.e() - &m1r)?];
    m.extend_from_slice(&c.m()[1..]);
    Ok(Cp2Class { d, m }.normalized())
}

/// One Cremona move: the transform
/// `(2d - m1 - m2 - m3; d - m2 - m3, d - m1 - m3, d - m1 - m2, m4, ...)`
/// applied to the (defensively re-sorted) class, followed by reordering and
/// dropping zero entries. Vectors shorter than 3 are zero-padded first.
pub fn cremona_move(c: &Cp2Class) -> Cp2Class {
    let mut m = c.m.clone();
    while m.len() < 3 {
        m.push(BigInt::zero());
    }
    m.sort_unstable_by(|a, b| b.cmp(a));
    let (m1, m2, m3) = (m[0].clone(), m[1].clone(), m[2].clone());
    let d = &c.d;
    let new_d = d * 2 - &m1 - &m2 - &m3;
    let mut new_m = vec![d - &m2 - &m3, d - &m1 - &m3, d - &m1 - &m2];
    new_m.extend_from_slice(&m[3..]);
    Cp2Class { d: new_d, m: new_m }.normalized()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The terminal state `(0; -1)` was reached.
    Reduced,
    /// A move failed to strictly decrease `d`, a negative entry appeared in
    /// a non-terminal state, or the step budget ran out.
    Stuck,
    /// The starting class was malformed (negative degree, or negative
    /// entries away from the terminal state).
    Invalid,
}

/// Full log of a reduction attempt; consecutive steps differ by exactly one
/// Cremona move.
#[derive(Clone, Debug)]
pub struct ReductionTrace {
    pub steps: Vec<Cp2Class>,
    pub verdict: Verdict,
}

impl ReductionTrace {
    pub fn reduced(&self) -> bool {
        self.verdict == Verdict::Reduced
    }

    /// Number of Cremona moves performed.
    pub fn move_count(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// One class per line, for eyeballing against printed reduction chains.
    pub fn render_log(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&step.to_string());
            out.push('\n');
        }
        out.push_str(&format!("verdict: {:?}\n", self.verdict));
        out
    }
}

/// Iterates Cremona moves until `(0; -1)` or failure.
pub fn reduces_to_minus_one(start: &Cp2Class, max_steps: usize) -> ReductionTrace {
    let mut state = start.clone().normalized();
    let mut steps = vec![state.clone()];
    if state.d.is_negative() {
        return ReductionTrace {
            steps,
            verdict: Verdict::Invalid,
        };
    }
    if !state.is_terminal() && state.m.iter().any(|x| x.is_negative()) {
        return ReductionTrace {
            steps,
            verdict: Verdict::Invalid,
        };
    }
    loop {
        if state.is_terminal() {
            return ReductionTrace {
                steps,
                verdict: Verdict::Reduced,
            };
        }
        if steps.len() > max_steps {
            return ReductionTrace {
                steps,
                verdict: Verdict::Stuck,
            };
        }
        let next = cremona_move(&state);
        let decreasing = next.d < state.d;
        steps.push(next.clone());
        if next.is_terminal() {
            return ReductionTrace {
                steps,
                verdict: Verdict::Reduced,
            };
        }
        if !decreasing || next.d.is_negative() || next.m.iter().any(|x| x.is_negative()) {
            return ReductionTrace {
                steps,
                verdict: Verdict::Stuck,
            };
        }
        state = next;
    }
}

/// Membership test for the set of exceptional classes: the Diophantine
/// equations must hold and the image under `phi_star` must reduce to
/// `(0; -1)` by Cremona moves.
pub fn is_in_e(c: &ExClass, max_steps: usize) -> bool {
    if c.is_sentinel() {
        return true;
    }
    if !diophantine_ok(c) {
        return false;
    }
    match phi_star(c) {
        Ok(img) => reduces_to_minus_one(&img, max_steps).reduced(),
        Err(_) => false,
    }
}

/// Positivity of intersections: `sum m_i m_i' <= d e' + d' e`, with the
/// shorter vector zero-padded. Precondition: the classes are distinct.
pub fn intersection_ok(c1: &ExClass, c2: &ExClass) -> bool {
    assert!(c1 != c2, "intersection_ok requires distinct classes");
    let dot: BigInt = c1
        .m()
        .iter()
        .zip(c2.m().iter())
        .map(|(a, b)| a * b)
        .sum();
    Rational::from_integer(dot) <= c1.d() * c2.e() + c2.d() * c1.e()
}

/// All nonincreasing positive integer vectors with the given sum and sum of
/// squares, entries bounded by `cap`.
fn partitions_with_square_sum(sum: i64, sum_sq: i64, cap: i64) -> Vec<Vec<i64>> {
    fn rec(sum: i64, sum_sq: i64, cap: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if sum == 0 && sum_sq == 0 {
            out.push(prefix.clone());
            return;
        }
        if sum <= 0 || sum_sq <= 0 || sum * sum < sum_sq {
            return;
        }
        let mut first = cap.min(sum);
        while first * first > sum_sq {
            first -= 1;
        }
        for v in (1..=first).rev() {
            prefix.push(v);
            rec(sum - v, sum_sq - v * v, v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(sum, sum_sq, cap, &mut Vec::new(), &mut out);
    out
}

/// The ten exceptional classes with at most seven multiplicities: a direct
/// enumeration over `d, e <= 5` filtered by the Diophantine equations and
/// Cremona reduction, plus the sentinel.
pub fn enumerate_e7(max_steps: usize) -> Vec<ExClass> {
    let mut found = vec![ExClass::sentinel()];
    for d in 0..=5i64 {
        for e in 0..=d {
            let sum = 2 * (d + e) - 1;
            let sum_sq = 2 * d * e + 1;
            if sum <= 0 || sum_sq <= 0 {
                continue;
            }
            for m in partitions_with_square_sum(sum, sum_sq, sum) {
                if m.len() > 7 {
                    continue;
                }
                let cls = ExClass::new_int(d, e, m);
                if is_in_e(&cls, max_steps) {
                    found.push(cls);
                }
            }
        }
    }
    found.sort();
    found.dedup();
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn diophantine_examples() {
        assert!(diophantine_ok(&ExClass::new_int(1, 1, vec![1, 1, 1])));
        assert!(diophantine_ok(&ExClass::new_int(4, 4, vec![3, 2, 2, 2, 2, 2, 2])));
        assert!(!diophantine_ok(&ExClass::new_int(2, 2, vec![2, 2, 1])));
        assert!(diophantine_ok(&ExClass::sentinel()));
    }

    #[test]
    fn phi_star_examples() {
        let img = phi_star(&ExClass::new_int(1, 1, vec![1, 1, 1])).unwrap();
        assert_eq!(img, Cp2Class::new(1, vec![1, 1]));

        // First displayed reduction step of the b_1(0) family at j = 0.
        let img = phi_star(&ExClass::new_int(5, 5, vec![3, 3, 3, 3, 3, 2, 1, 1])).unwrap();
        assert_eq!(img, Cp2Class::new(7, vec![3, 3, 3, 3, 2, 2, 2, 1, 1]));

        let img = phi_star(&ExClass::new_int(2, 1, vec![1, 1, 1, 1, 1])).unwrap();
        assert_eq!(img, Cp2Class::new(2, vec![1, 1, 1, 1, 1]));
    }

    #[test]
    fn cremona_move_examples() {
        assert_eq!(
            cremona_move(&Cp2Class::new(1, vec![1, 1])),
            Cp2Class::new(0, vec![-1])
        );
        assert_eq!(
            cremona_move(&Cp2Class::new(2, vec![1, 1, 1, 1, 1])),
            Cp2Class::new(1, vec![1, 1])
        );
        let mut m = vec![5];
        m.extend(std::iter::repeat_n(1, 12));
        let mut expect = vec![4];
        expect.extend(std::iter::repeat_n(1, 10));
        assert_eq!(cremona_move(&Cp2Class { d: BigInt::from(6), m: m.into_iter().map(BigInt::from).collect() }),
            Cp2Class { d: BigInt::from(5), m: expect.into_iter().map(BigInt::from).collect() });
    }

    #[test]
    fn reduction_examples() {
        let t = reduces_to_minus_one(&Cp2Class::new(2, vec![1, 1, 1, 1, 1]), 100);
        assert_eq!(t.verdict, Verdict::Reduced);
        assert_eq!(t.move_count(), 2);

        // V^2 from the staircase reduction ladder reduces in 8 moves.
        let mut m = vec![11, 6, 6, 6, 5, 5];
        m.extend(std::iter::repeat_n(1, 11));
        let t = reduces_to_minus_one(
            &Cp2Class {
                d: BigInt::from(17),
                m: m.into_iter().map(BigInt::from).collect(),
            },
            100,
        );
        assert_eq!(t.verdict, Verdict::Reduced);
        assert_eq!(t.move_count(), 8);

        let cls = ExClass::new_int(16, 16, vec![9, 9, 9, 9, 9, 9, 3, 3, 3]);
        assert!(diophantine_ok(&cls));
        let t = reduces_to_minus_one(&phi_star(&cls).unwrap(), 1000);
        assert_eq!(t.verdict, Verdict::Stuck);
    }

    #[test]
    fn trace_log_renders_one_class_per_line() {
        let t = reduces_to_minus_one(&Cp2Class::new(2, vec![1, 1, 1, 1, 1]), 100);
        let log = t.render_log();
        let lines: Vec<&str> = log.lines().collect();
        assert_eq!(lines.len(), 4); // three states plus the verdict
        assert_eq!(lines[0], "(2;1^5)");
        assert_eq!(lines[1], "(1;1^2)");
        assert_eq!(lines[2], "(0;-1)");
        assert_eq!(lines[3], "verdict: Reduced");
    }

    #[test]
    fn membership_examples() {
        assert!(is_in_e(&ExClass::new_int(3, 3, vec![2, 2, 2, 2, 1, 1, 1]), 100));
        assert!(!is_in_e(
            &ExClass::new_int(25, 25, vec![14, 14, 14, 14, 14, 14, 5, 5, 5]),
            1000
        ));
        assert!(is_in_e(&ExClass::sentinel(), 10));
    }

    #[test]
    fn intersection_examples() {
        let a = ExClass::new_int(1, 1, vec![1, 1, 1]);
        let b = ExClass::new_int(2, 1, vec![1, 1, 1, 1, 1]);
        assert!(intersection_ok(&a, &b));
    }

    #[test]
    fn e7_list_is_exact() {
        let found = enumerate_e7(DEFAULT_MAX_STEPS);
        let expected = vec![
            ExClass::sentinel(),
            ExClass::new_int(1, 0, vec![1]),
            ExClass::new_int(1, 1, vec![1, 1, 1]),
            ExClass::new_int(2, 1, vec![1, 1, 1, 1, 1]),
            ExClass::new_int(2, 2, vec![2, 1, 1, 1, 1, 1]),
            ExClass::new_int(3, 1, vec![1, 1, 1, 1, 1, 1, 1]),
            ExClass::new_int(3, 2, vec![2, 2, 1, 1, 1, 1, 1]),
            ExClass::new_int(3, 3, vec![2, 2, 2, 2, 1, 1, 1]),
            ExClass::new_int(4, 3, vec![2, 2, 2, 2, 2, 2, 1]),
            ExClass::new_int(4, 4, vec![3, 2, 2, 2, 2, 2, 2]),
        ];
        let mut expected = expected;
        expected.sort();
        assert_eq!(found, expected);
        for (i, a) in found.iter().enumerate() {
            for b in &found[i + 1..] {
                assert!(intersection_ok(a, b), "intersection failed: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cremona_preserves_diophantine_functionals() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let d = rng.gen_range(0i64..30);
            let len = rng.gen_range(0usize..9);
            let m: Vec<i64> = (0..len).map(|_| rng.gen_range(0i64..12)).collect();
            let c = Cp2Class::new(d, m);
            let before_sum: BigInt = c.m.iter().sum::<BigInt>() - (&c.d * 3 - 1);
            let before_sq: BigInt =
                c.m.iter().map(|x| x * x).sum::<BigInt>() - (&c.d * &c.d + 1);
            let after = cremona_move(&c);
            let after_sum: BigInt = after.m.iter().sum::<BigInt>() - (&after.d * 3 - 1);
            let after_sq: BigInt =
                after.m.iter().map(|x| x * x).sum::<BigInt>() - (&after.d * &after.d + 1);
            assert_eq!(before_sum, after_sum);
            assert_eq!(before_sq, after_sq);
        }
    }
}
