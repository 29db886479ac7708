//! Searches for obstructive classes: restricted partitions with prescribed
//! sum and sum of squares, the point search (seed vector plus block
//! perturbations), and the two interval searches for candidates on
//! `(6 + 1/(k+1), 6 + 1/k)`.
//!
//! The floor of the irrationally scaled weight vector is computed exactly
//! by integer square comparison, so no decision in here touches floating
//! point.

use crate::exactnum::{ceil_sqrt, cmp_rational_vs_sqrt, floor_sqrt, floor_to_int, Rational};
use crate::exclass::{diophantine_ok, phi_star, reduces_to_minus_one, ExClass};
use crate::obstruction::mu;
use crate::weights::{continued_fraction, weight_expansion, ContinuedFraction};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// What a report was computed for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum SearchQuery {
    /// All classes with `l(m) = l(a)` at the point `a`, degrees up to `d_max`.
    Point { a: String, d_max: u64 },
    /// Candidates on the open interval `(6 + 1/(k+1), 6 + 1/k)`.
    Interval { k: u32, d_max: u64, variant: u8 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CandidateFlags {
    pub diophantine_ok: bool,
    /// Image under the basis change reduces to `(0; -1)`.
    pub reduces: bool,
    /// Strict obstruction at the query point (absent for interval queries).
    pub obstructive: Option<bool>,
    /// The constraint exactly meets the volume bound at the query point,
    /// which by the strict definition is not an obstruction.
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub cls: ExClass,
    pub flags: CandidateFlags,
}

/// Outcome of a search, with every candidate that survived the arithmetic
/// filters; candidates failing Cremona reduction are retained with their
/// flags for audit.
#[derive(Clone, Debug)]
pub struct SearchReport {
    pub query: SearchQuery,
    pub candidates: Vec<Candidate>,
}

impl SearchReport {
    /// Verified obstructive classes: Diophantine, reducing, strictly above
    /// the volume bound.
    pub fn obstructive_classes(&self) -> Vec<ExClass> {
        self.candidates
            .iter()
            .filter(|c| {
                c.flags.diophantine_ok && c.flags.reduces && c.flags.obstructive == Some(true)
            })
            .map(|c| c.cls.clone())
            .collect()
    }

    /// Verified members of the exceptional set among the candidates.
    pub fn reducing_classes(&self) -> Vec<ExClass> {
        self.candidates
            .iter()
            .filter(|c| c.flags.diophantine_ok && c.flags.reduces)
            .map(|c| c.cls.clone())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let candidates: Vec<serde_json::Value> = self
            .candidates
            .iter()
            .map(|c| {
                serde_json::json!({
                    "d": c.cls.d().to_string(),
                    "e": c.cls.e().to_string(),
                    "m": c.cls.m().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    "flags": c.flags,
                })
            })
            .collect();
        serde_json::json!({
            "query": self.query,
            "candidates": candidates,
        })
    }
}

fn sort_candidates(cands: &mut Vec<Candidate>) {
    cands.sort_by(|x, y| {
        x.cls
            .d()
            .cmp(y.cls.d())
            .then_with(|| x.cls.e().cmp(y.cls.e()))
            .then_with(|| x.cls.m().cmp(y.cls.m()))
    });
    cands.dedup();
}

/// All nonincreasing vectors of positive integers with sum `s`, sum of
/// squares `q`, and entries at most `cap`.
pub fn solutions(s: i64, q: i64, cap: i64) -> Vec<Vec<i64>> {
    fn rec(s: i64, q: i64, cap: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if s == 0 && q == 0 {
            out.push(prefix.clone());
            return;
        }
        if s <= 0 || q <= 0 || s * s < q {
            return;
        }
        if s * s == q {
            if s <= cap {
                prefix.push(s);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        let mut top = cap.min(s);
        while top * top > q {
            top -= 1;
        }
        for i in (1..=top).rev() {
            prefix.push(i);
            rec(s - i, q - i * i, i, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if cap >= 0 {
        rec(s, q, cap, &mut Vec::new(), &mut out);
    }
    out.sort();
    out.dedup();
    out
}

/// The per-block perturbation set: all-zeros, first-entry-plus-one,
/// all-ones, and all-ones-except-last, deduplicated.
fn block_perturbations(len: usize) -> Vec<Vec<i64>> {
    let t0 = vec![0i64; len];
    let mut t0p = t0.clone();
    t0p[0] = 1;
    let t1 = vec![1i64; len];
    let mut t1m = t1.clone();
    t1m[len - 1] = 0;
    let set: BTreeSet<Vec<i64>> = [t0, t0p, t1, t1m].into_iter().collect();
    set.into_iter().collect()
}

/// Cartesian product of the per-block perturbation sets over the
/// continued-fraction blocks of `a`, deduplicated.
pub fn perturbations(cf: &ContinuedFraction) -> Vec<Vec<i64>> {
    let mut acc: Vec<Vec<i64>> = vec![Vec::new()];
    for &term in &cf.terms {
        let blocks = block_perturbations(term as usize);
        let mut next = Vec::with_capacity(acc.len() * blocks.len());
        for head in &acc {
            for block in &blocks {
                let mut v = head.clone();
                v.extend_from_slice(block);
                next.push(v);
            }
        }
        acc = next;
    }
    let set: BTreeSet<Vec<i64>> = acc.into_iter().collect();
    set.into_iter().collect()
}

/// `floor(c / sqrt(two_a))` for `c >= 0`, by integer square comparison.
fn floor_div_sqrt(c: &Rational, two_a: &Rational) -> BigInt {
    debug_assert!(!c.is_negative());
    floor_sqrt(&(c * c / two_a))
}

/// Point search: for each `d <= d_max` and both shapes `(d, d)` and
/// `(d, d-1)`, seed with the exact floor of the scaled weight vector, add
/// each block perturbation, and keep the vectors that satisfy the
/// Diophantine equations and meet the volume bound (`>=` for the `(d, d)`
/// shape, with equality hits flagged as boundary; strict `>` for the
/// `(d, d-1)` shape).
pub fn sol_less(a: &Rational, d_max: u64) -> Result<SearchReport> {
    if a <= &Rational::one() {
        return Err(Error::Domain(format!("sol_less needs a > 1, got {a}")));
    }
    let cf = continued_fraction(a)?;
    let w = weight_expansion(a)?;
    let perts = perturbations(&cf);
    let two = Rational::from_integer(BigInt::from(2));
    let two_a = a * &two;
    let half_a = a / &two;

    let per_degree = |d: u64| -> Vec<Candidate> {
        let mut found = Vec::new();
        let d_big = BigInt::from(d);
        for shape in 0..2u8 {
            // shape 0: (d, d); shape 1: (d, d-1)
            if shape == 1 && d == 0 {
                continue;
            }
            let degree_sum = if shape == 0 {
                Rational::from_integer(&d_big * 2)
            } else {
                Rational::from_integer(&d_big * 2 - 1)
            };
            let (target_sum, target_sq) = if shape == 0 {
                (&d_big * 4 - 1, &d_big * &d_big * 2 + 1)
            } else {
                (&d_big * 4 - 3, &d_big * &d_big * 2 - &d_big * 2 + 1)
            };
            let seed: Vec<BigInt> = w
                .entries()
                .iter()
                .map(|wi| floor_div_sqrt(&(wi * &degree_sum), &two_a))
                .collect();
            let mut seen = BTreeSet::new();
            for pert in &perts {
                let mut v: Vec<BigInt> = seed
                    .iter()
                    .zip(pert.iter())
                    .map(|(f, p)| f + BigInt::from(*p))
                    .collect();
                v.sort_unstable_by(|x, y| y.cmp(x));
                if v.last().is_none_or(|x| !x.is_positive()) {
                    continue;
                }
                let sum: BigInt = v.iter().sum();
                if sum != target_sum {
                    continue;
                }
                let sum_sq: BigInt = v.iter().map(|x| x * x).sum();
                if sum_sq != target_sq {
                    continue;
                }
                if !seen.insert(v.clone()) {
                    continue;
                }
                let e = if shape == 0 { d as i64 } else { d as i64 - 1 };
                let cls = ExClass::new(
                    Rational::from_integer(d_big.clone()),
                    Rational::from_integer(BigInt::from(e)),
                    v,
                );
                let constraint = mu(&cls, a).expect("d + e > 0");
                let cmp = cmp_rational_vs_sqrt(&constraint, &half_a);
                let keep = match shape {
                    0 => cmp != Ordering::Less,
                    _ => cmp == Ordering::Greater,
                };
                if !keep {
                    continue;
                }
                let reduces = phi_star(&cls)
                    .map(|img| {
                        reduces_to_minus_one(&img, crate::exclass::DEFAULT_MAX_STEPS).reduced()
                    })
                    .unwrap_or(false);
                found.push(Candidate {
                    flags: CandidateFlags {
                        diophantine_ok: diophantine_ok(&cls),
                        reduces,
                        obstructive: Some(cmp == Ordering::Greater),
                        boundary: cmp == Ordering::Equal,
                    },
                    cls,
                });
            }
        }
        found
    };

    let mut candidates: Vec<Candidate> = (1..=d_max)
        .into_par_iter()
        .map(per_degree)
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    sort_candidates(&mut candidates);
    Ok(SearchReport {
        query: SearchQuery::Point {
            a: a.to_string(),
            d_max,
        },
        candidates,
    })
}

/// `round(sqrt(x))` with ties going to the even integer, for `x >= 0`.
fn round_sqrt(x: &Rational) -> BigInt {
    let f: BigInt = floor_sqrt(x);
    let half = Rational::from_integer(f.clone()) + Rational::new(BigInt::one(), BigInt::from(2));
    match (&half * &half).cmp(x) {
        Ordering::Less => f + 1,
        Ordering::Greater => f,
        Ordering::Equal => {
            if (&f % BigInt::from(2)).is_zero() {
                f
            } else {
                f + 1
            }
        }
    }
}

fn check_interval_k(k: u32) -> Result<()> {
    if (1..=7).contains(&k) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "interval searches cover k in 1..=7, got {k}"
        )))
    }
}

/// Interval search for candidates with `m_1 = ... = m_6`: seeds the first
/// six entries and the following block of `k` equal entries from the
/// scaled weights of the interval endpoints, perturbs, appends the entry
/// forced by the block-gap bounds, and fills the tail with `solutions`.
/// Then prunes by length, tail-gap and last-block-sum rules.
pub fn inter_sol_less1(k: u32, d_max: u64) -> Result<SearchReport> {
    check_interval_k(k)?;
    let mut candidates: Vec<Candidate> = (1..=d_max)
        .into_par_iter()
        .map(|d| {
            let mut local = Vec::new();
            for case in 0..2u8 {
                prelist_intersol(k, d, case, &mut local);
            }
            local
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    sort_candidates(&mut candidates);
    Ok(SearchReport {
        query: SearchQuery::Interval {
            k,
            d_max,
            variant: 1,
        },
        candidates,
    })
}

fn prelist_intersol(k: u32, d: u64, case: u8, out: &mut Vec<Candidate>) {
    let ki = k as i64;
    let di = d as i64;
    if case == 1 && di < 1 {
        return;
    }
    let u = Rational::new(BigInt::one(), BigInt::from(ki + 1));
    let v = Rational::new(BigInt::one(), BigInt::from(ki));
    let six = Rational::from_integer(BigInt::from(6));
    let two_d_sq = Rational::from_integer(BigInt::from(2 * di * di));
    // sqrt(2) d / sqrt(6 + x) = sqrt(2 d^2 / (6 + x))
    let scale_v = &two_d_sq / (&six + &v);
    let scale_u = &two_d_sq / (&six + &u);
    let m1 = round_sqrt(&scale_v).to_i64().expect("fits");
    let m1_hi = round_sqrt(&scale_u).to_i64().expect("fits");
    let mx = floor_sqrt(&(&scale_v * &u * &u)).to_i64().expect("fits") - 1;
    let mx_hi = ceil_sqrt(&(&scale_u * &v * &v)).to_i64().expect("fits") + 1;
    let spread = ceil_sqrt(&Rational::from_integer(BigInt::from(ki + 2)))
        .to_i64()
        .expect("fits")
        - 1;
    let len = 6 + k as usize;
    // Per-candidate tweaks: last-of-block minus one, nothing, seventh
    // entry plus one.
    let mut pp: Vec<Vec<i64>> = Vec::new();
    let mut tm = vec![0i64; len];
    tm[len - 1] = -1;
    pp.push(tm);
    pp.push(vec![0i64; len]);
    let mut tp = vec![0i64; len];
    tp[6] = 1;
    pp.push(tp);

    let (target_sum, target_sq, e) = if case == 0 {
        (4 * di - 1, 2 * di * di + 1, di)
    } else {
        (4 * di - 3, 2 * di * (di - 1) + 1, di - 1)
    };

    for i in 0..=(m1_hi - m1).max(0) {
        for j in 0..=(mx_hi - mx).max(0) {
            for pert in &pp {
                for t in -spread..=spread {
                    let mut m: Vec<i64> = Vec::with_capacity(len + 1);
                    m.extend(std::iter::repeat_n(m1 + i, 6));
                    m.extend(std::iter::repeat_n(mx + j, k as usize));
                    for (slot, p) in m.iter_mut().zip(pert.iter()) {
                        *slot += p;
                    }
                    let block_sum: i64 = m[6..6 + k as usize].iter().sum();
                    m.push(m[5] - block_sum + t);
                    let sorted = m.windows(2).all(|wnd| wnd[0] >= wnd[1]);
                    if !sorted || *m.last().unwrap() <= 0 {
                        continue;
                    }
                    let head_sum: i64 = m.iter().sum();
                    let head_sq: i64 = m.iter().map(|x| x * x).sum();
                    let budget_sum = target_sum - head_sum;
                    let budget_sq = target_sq - head_sq;
                    if budget_sum < 0 || budget_sq < 0 {
                        continue;
                    }
                    for tail in solutions(budget_sum, budget_sq, *m.last().unwrap()) {
                        let mut full = m.clone();
                        full.extend_from_slice(&tail);
                        while full.last() == Some(&0) {
                            full.pop();
                        }
                        if !intersol_keep(k, &full) {
                            continue;
                        }
                        let cls = ExClass::new_int(di, e, full);
                        push_interval_candidate(cls, out);
                    }
                }
            }
        }
    }
}

/// Pruning rules for interval candidates: minimal length, bounded gaps
/// between the last entries, and the last-block sum bound.
fn intersol_keep(k: u32, m: &[i64]) -> bool {
    let l = m.len();
    let ki = k as usize;
    if l <= 6 + ki + 2 {
        return false;
    }
    if m[l - 2] - m[l - 1] > 1 {
        return false;
    }
    if m[l - 3] > m[l - 2] + 1 && (m[l - 3] - m[l - 2] - m[l - 1]).abs() > 1 {
        return false;
    }
    if k == 1 && l >= 9 && m[7] - m[8] > 1 && (m[6] - (m[7] + m[8])).abs() > 1 {
        return false;
    }
    // Last-block sum rule: m_{6+k} - (sum of the rest) < sqrt(l - k - 5).
    let rest: i64 = m[6 + ki..].iter().sum();
    let gap = m[6 + ki - 1] - rest;
    if gap >= 0 && gap * gap >= (l - ki - 5) as i64 {
        return false;
    }
    true
}

fn push_interval_candidate(cls: ExClass, out: &mut Vec<Candidate>) {
    let reduces = phi_star(&cls)
        .map(|img| reduces_to_minus_one(&img, crate::exclass::DEFAULT_MAX_STEPS).reduced())
        .unwrap_or(false);
    out.push(Candidate {
        flags: CandidateFlags {
            diophantine_ok: diophantine_ok(&cls),
            reduces,
            obstructive: None,
            boundary: false,
        },
        cls,
    });
}

/// Interval search for candidates with `m_1 != m_6`: the head is either
/// `(M+1, M^5, m^k)` or `(M^5, M-1, m^k)`, scanned within the Diophantine
/// budget, with the tail filled by `solutions` capped at `m`. Only the
/// `(d, d)` shape occurs here.
pub fn inter_sol_less2(k: u32, d_max: u64) -> Result<SearchReport> {
    check_interval_k(k)?;
    let ki = k as i64;
    let mut candidates = Vec::new();
    for d in 1..=d_max as i64 {
        let budget_sum = 4 * d - 1;
        let budget_sq = 2 * d * d + 1;
        for head_kind in 0..2u8 {
            // head 0: (M+1, M^5, m^k, ...); head 1: (M^5, M-1, m^k, ...)
            type HeadFn = fn(i64) -> i64;
            let (head_sum, head_sq): (HeadFn, HeadFn) = if head_kind == 0 {
                (|m| 6 * m + 1, |m| 6 * m * m + 2 * m + 1)
            } else {
                (|m| 6 * m - 1, |m| 6 * m * m - 2 * m + 1)
            };
            let mut big_m = 1i64;
            while head_sum(big_m) <= budget_sum && head_sq(big_m) <= budget_sq {
                let mut small_m = 1i64;
                while head_sum(big_m) + ki * small_m <= budget_sum
                    && head_sq(big_m) + ki * small_m * small_m <= budget_sq
                    && small_m <= big_m
                {
                    let rem_sum = budget_sum - head_sum(big_m) - ki * small_m;
                    let rem_sq = budget_sq - head_sq(big_m) - ki * small_m * small_m;
                    for tail in solutions(rem_sum, rem_sq, rem_sum.min(isqrt(rem_sq))) {
                        if tail.first().is_some_and(|&t| t > small_m) {
                            continue;
                        }
                        let mut m = Vec::new();
                        if head_kind == 0 {
                            m.push(big_m + 1);
                            m.extend(std::iter::repeat_n(big_m, 5));
                        } else {
                            m.extend(std::iter::repeat_n(big_m, 5));
                            m.push(big_m - 1);
                        }
                        m.extend(std::iter::repeat_n(small_m, k as usize));
                        m.extend_from_slice(&tail);
                        while m.last() == Some(&0) {
                            m.pop();
                        }
                        push_interval_candidate(ExClass::new_int(d, d, m), &mut candidates);
                    }
                    small_m += 1;
                }
                big_m += 1;
            }
        }
    }
    sort_candidates(&mut candidates);
    Ok(SearchReport {
        query: SearchQuery::Interval {
            k,
            d_max,
            variant: 2,
        },
        candidates,
    })
}

fn isqrt(x: i64) -> i64 {
    if x <= 0 {
        0
    } else {
        floor_to_int(&Rational::from_integer(BigInt::from(x)))
            .sqrt()
            .to_i64()
            .expect("fits")
    }
}

/// The degree cutoffs used by the interval sweeps: with
/// `delta_k = y(6 + 1/(k+1)) - 1/40`, candidates on
/// `(6 + 1/(k+1), 6 + 1/k)` with denominator at least 40 satisfy
///
/// - equal first six entries (variant 1):
///   `d <= sqrt(6 + 1/k) / (sqrt(2) delta_k) * (7/(4 delta_k) - 1)`,
/// - unequal first six entries (variant 2):
///   `d <= sqrt(6 + 1/k) / (sqrt(2) delta_k) *
///    ((1/6) / ((1 - 1/(2 sqrt(3))) delta_k) - 1)`.
///
/// Computed with outward rational rounding, so the returned integer is a
/// safe over-approximation; a nonpositive bound collapses to 0 (the sweep
/// is vacuous for that `k`).
pub fn interval_proof_bound(k: u32, variant: u8) -> Result<u64> {
    check_interval_k(k)?;
    const DIGITS: u32 = 40;
    let one = Rational::one();
    let two = Rational::from_integer(BigInt::from(2));
    let ki = k as i64;
    let a_hi = Rational::from_integer(BigInt::from(6)) + Rational::new(BigInt::one(), BigInt::from(ki));
    let a_lo = Rational::from_integer(BigInt::from(6))
        + Rational::new(BigInt::one(), BigInt::from(ki + 1));
    // delta = y(a_lo) - 1/40, bounded from below.
    let (_, sqrt2alo_hi) = crate::exactnum::sqrt_bounds(&(&a_lo * &two), DIGITS);
    let delta_lo = &a_lo + &one - &two * &sqrt2alo_hi - Rational::new(BigInt::one(), BigInt::from(40));
    if !delta_lo.is_positive() {
        return Err(Error::BoundUnavailable(format!(
            "interval sweep bound needs y(6+1/{}) > 1/40",
            ki + 1
        )));
    }
    let (_, sqrt_ahi_hi) = crate::exactnum::sqrt_bounds(&a_hi, DIGITS);
    let (sqrt2_lo, _) = crate::exactnum::sqrt_bounds(&two, DIGITS);
    let lead = sqrt_ahi_hi / (&sqrt2_lo * &delta_lo);
    let inner = match variant {
        1 => Rational::new(BigInt::from(7), BigInt::from(4)) / &delta_lo - &one,
        2 => {
            let (sqrt3_lo, _) =
                crate::exactnum::sqrt_bounds(&Rational::from_integer(BigInt::from(3)), DIGITS);
            // sigma <= 1/6 and v_M >= 1 - 1/(2 sqrt(3)).
            let v_m_lo = &one - (&two * &sqrt3_lo).recip();
            let sigma_over = Rational::new(BigInt::one(), BigInt::from(6)) / v_m_lo;
            sigma_over / &delta_lo - &one
        }
        _ => {
            return Err(Error::Domain(format!(
                "interval sweep variant must be 1 or 2, got {variant}"
            )))
        }
    };
    if !inner.is_positive() {
        return Ok(0);
    }
    // Variant 1 scans both class shapes; shift by 1/2 before rounding.
    let shift = if variant == 1 {
        Rational::new(BigInt::one(), BigInt::from(2))
    } else {
        Rational::from_integer(BigInt::from(0))
    };
    let bound = lead * inner + shift;
    Ok(crate::exactnum::ceil_to_int(&bound).to_u64().expect("fits"))
}
