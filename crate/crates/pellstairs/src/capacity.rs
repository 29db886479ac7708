//! The embedding capacity function `c(a)`: a closed-form evaluator (the
//! Pell staircase up to `sigma^2`, seven exceptional intervals up to
//! `7 1/32`, the volume curve elsewhere) and an independent evaluator that
//! takes the supremum of the constraints of explicitly enumerated
//! exceptional classes. Also the packing numbers of the cube.

use crate::exactnum::{QuadExt, Rational};
use crate::exclass::{enumerate_e7, ExClass, DEFAULT_MAX_STEPS};
use crate::obstruction::{
    above_sigma_squared, beating_degree_bound, d_upper_bound, mu, volume_bound, Regime,
};
use crate::pell::{alpha, beta, class_e_alpha, class_e_b, class_e_beta};
use crate::search::sol_less;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Degree cutoff used for the sweep anchored at `49/8`, where
/// `y(a) = 1/q` exactly and no error-sum bound exists. Larger than every
/// analytic bound used at the neighboring anchor points.
pub const DEGENERATE_ANCHOR_D: u64 = 800;

/// Which part of the closed form produced a value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    /// `a/sqrt(2 alpha_n)` on `[alpha_n, beta_n]`.
    StaircaseLinear { n: u32 },
    /// `sqrt(alpha_n / 2)` on `[beta_{n-1}, alpha_n]` (`n = 0` covers
    /// `[1, 2]`, where the value is 1).
    StaircaseFlat { n: u32 },
    /// One of the seven exceptional intervals, with its class.
    TableInterval { x: Rational, cls: ExClass },
    /// The volume constraint `sqrt(a/2)`.
    Volume,
    /// The supremum over searched classes (obstruction evaluator only).
    ObstructionClass(ExClass),
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::StaircaseLinear { n } => write!(f, "staircase linear n={n}"),
            Source::StaircaseFlat { n } => write!(f, "staircase flat n={n}"),
            Source::TableInterval { x, cls } => write!(f, "obstruction {cls} (interval at {x})"),
            Source::Volume => write!(f, "volume"),
            Source::ObstructionClass(cls) => write!(f, "obstruction {cls}"),
        }
    }
}

/// Whether a searched value is certified to equal `c(a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    LowerBound,
}

#[derive(Clone, Debug)]
pub struct CapacityValue {
    pub a: Rational,
    /// Either rational or a pure square root; `value^2` is always rational.
    pub value: QuadExt,
    pub source: Source,
    pub exactness: Exactness,
}

impl CapacityValue {
    pub fn squared(&self) -> Rational {
        let sq = self.value.square();
        sq.as_rational().expect("capacity squares are rational").clone()
    }

    /// Exact textual form: `p/q` or `sqrt(p/q)`.
    pub fn exact_text(&self) -> String {
        self.value.to_string()
    }
}

/// The seven intervals where `c` exceeds the volume constraint above
/// `sigma^2`, plus the supplementary classes that share a kink point but
/// never bind.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub x: Rational,
    pub cls: ExClass,
    /// Degree sum `d + e` of the class.
    pub degree: Rational,
    /// `c(z) = (a0 + b0 z)/(d+e)` on `[u, x]`.
    pub a0: Rational,
    pub b0: Rational,
    /// `c(z) = (a1 + b1 z)/(d+e)` on `[x, v]`.
    pub a1: Rational,
    pub b1: Rational,
    pub c_at_x: Rational,
    pub u: QuadExt,
    pub v: QuadExt,
}

fn qx(x: (i64, i64), y: (i64, i64), r: i64) -> QuadExt {
    QuadExt::new(
        Rational::new(BigInt::from(x.0), BigInt::from(x.1)),
        Rational::new(BigInt::from(y.0), BigInt::from(y.1)),
        Rational::from_integer(BigInt::from(r)),
    )
    .expect("table radicands are positive")
}

fn row(
    x: (i64, i64),
    cls: ExClass,
    left: (i64, i64),
    right: (i64, i64),
    c_at_x: (i64, i64),
    u: QuadExt,
    v: QuadExt,
) -> TableRow {
    let degree = cls.degree_sum();
    TableRow {
        x: Rational::new(BigInt::from(x.0), BigInt::from(x.1)),
        cls,
        degree,
        a0: Rational::from_integer(BigInt::from(left.0)),
        b0: Rational::from_integer(BigInt::from(left.1)),
        a1: Rational::from_integer(BigInt::from(right.0)),
        b1: Rational::from_integer(BigInt::from(right.1)),
        c_at_x: Rational::new(BigInt::from(c_at_x.0), BigInt::from(c_at_x.1)),
        u,
        v,
    }
}

/// The seven rows, ordered by interval.
pub fn table_rows() -> &'static [TableRow] {
    static ROWS: OnceLock<Vec<TableRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        vec![
            row(
                (6, 1),
                ExClass::new_int(2, 2, vec![2, 1, 1, 1, 1, 1]),
                (1, 1),
                (7, 0),
                (7, 4),
                qx((3, 1), (2, 1), 2),
                qx((49, 8), (0, 1), 1),
            ),
            row(
                (43, 7),
                ExClass::new_int(28, 28, vec![16, 16, 16, 16, 16, 16, 3, 2, 2, 2, 2, 2, 2]),
                (6, 15),
                (92, 1),
                (687, 392),
                qx((694, 225), (56, 225), 151),
                qx((692, 1), (-280, 1), 6),
            ),
            row(
                (37, 6),
                ExClass::new_int(14, 14, vec![8, 8, 8, 8, 8, 8, 2, 1, 1, 1, 1, 1]),
                (6, 7),
                (43, 1),
                (295, 168),
                qx((22, 7), (8, 7), 7),
                qx((153, 1), (-14, 1), 110),
            ),
            row(
                (31, 5),
                ExClass::new_int(11, 10, vec![6, 6, 6, 6, 6, 6, 1, 1, 1, 1, 1]),
                (6, 5),
                (37, 0),
                (37, 21),
                qx((321, 100), (21, 100), 201),
                qx((2738, 441), (0, 1), 1),
            ),
            row(
                (19, 3),
                ExClass::new_int(7, 7, vec![4, 4, 4, 4, 4, 4, 1, 1, 1]),
                (6, 3),
                (25, 0),
                (25, 14),
                qx((31, 9), (7, 9), 13),
                qx((625, 98), (0, 1), 1),
            ),
            row(
                (13, 2),
                ExClass::new_int(9, 9, vec![5, 5, 5, 5, 5, 5, 3, 2]),
                (0, 5),
                (26, 1),
                (65, 36),
                qx((162, 25), (0, 1), 1),
                qx((55, 1), (-9, 1), 29),
            ),
            row(
                (7, 1),
                ExClass::new_int(4, 4, vec![3, 2, 2, 2, 2, 2, 2]),
                (1, 2),
                (15, 0),
                (15, 8),
                qx((7, 2), (2, 1), 3),
                qx((225, 32), (0, 1), 1),
            ),
        ]
    })
}

/// Classes that share a constraint value with a table row at its kink
/// point but never exceed the closed form; kept for verification.
pub fn supplementary_rows() -> &'static [TableRow] {
    static ROWS: OnceLock<Vec<TableRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        vec![
            row(
                (43, 7),
                ExClass::new_int(
                    196,
                    196,
                    vec![112, 112, 112, 112, 112, 111, 16, 16, 16, 16, 16, 16, 16],
                ),
                (-1, 112),
                (687, 0),
                (687, 392),
                qx((344, 112), (7, 112), 2415),
                qx((471969, 76832), (0, 1), 1),
            ),
            row(
                (37, 6),
                ExClass::new_int(84, 84, vec![48, 48, 48, 48, 48, 47, 8, 8, 8, 8, 8, 8]),
                (-1, 48),
                (295, 0),
                (295, 168),
                qx((148, 48), (7, 48), 447),
                qx((87025, 14112), (0, 1), 1),
            ),
            row(
                (25, 4),
                ExClass::new_int(28, 28, vec![16, 16, 16, 16, 16, 15, 4, 4, 4, 4]),
                (-1, 16),
                (99, 0),
                (99, 56),
                qx((50, 16), (7, 16), 51),
                qx((9801, 1568), (0, 1), 1),
            ),
        ]
    })
}

fn sqrt_rational_exact(x: &Rational) -> Rational {
    QuadExt::sqrt_of(x.clone())
        .expect("nonnegative")
        .as_rational()
        .expect("perfect square")
        .clone()
}

/// Locates the staircase segment of `a in (2, sigma^2)` and returns the
/// closed-form value with its source.
fn staircase_value(a: &Rational) -> (Rational, Source) {
    debug_assert!(a > &Rational::from_integer(BigInt::from(2)));
    let mut n = 0u32;
    loop {
        let b = beta(n);
        if a <= &b {
            let al = alpha(n);
            if a >= &al {
                // Linear piece: a / sqrt(2 alpha_n), with 2 alpha_n a
                // perfect rational square.
                let slope = sqrt_rational_exact(&(&al * Rational::from_integer(BigInt::from(2))));
                return (a / slope, Source::StaircaseLinear { n });
            }
            let next = alpha(n);
            let value = sqrt_rational_exact(&(next / Rational::from_integer(BigInt::from(2))));
            return (value, Source::StaircaseFlat { n });
        }
        n += 1;
        assert!(n < 10_000, "staircase search ran away at a = {a}");
    }
}

/// The closed-form capacity `c(a)`, exact for every rational `a >= 1`.
pub fn c_closed_form(a: &Rational) -> Result<CapacityValue> {
    if a < &Rational::one() {
        return Err(Error::Domain(format!("c(a) is defined for a >= 1, got {a}")));
    }
    let two = Rational::from_integer(BigInt::from(2));
    if a <= &two {
        return Ok(CapacityValue {
            a: a.clone(),
            value: QuadExt::rational(Rational::one()),
            source: Source::StaircaseFlat { n: 0 },
            exactness: Exactness::Exact,
        });
    }
    if !above_sigma_squared(a) {
        let (value, source) = staircase_value(a);
        return Ok(CapacityValue {
            a: a.clone(),
            value: QuadExt::rational(value),
            source,
            exactness: Exactness::Exact,
        });
    }
    let ceiling = Rational::new(BigInt::from(225), BigInt::from(32));
    if a < &ceiling {
        let av = QuadExt::rational(a.clone());
        for row in table_rows() {
            if av.sub(&row.u).sign() > 0 && row.v.sub(&av).sign() > 0 {
                let value = if a <= &row.x {
                    (&row.a0 + &row.b0 * a) / &row.degree
                } else {
                    (&row.a1 + &row.b1 * a) / &row.degree
                };
                return Ok(CapacityValue {
                    a: a.clone(),
                    value: QuadExt::rational(value),
                    source: Source::TableInterval {
                        x: row.x.clone(),
                        cls: row.cls.clone(),
                    },
                    exactness: Exactness::Exact,
                });
            }
        }
    }
    Ok(CapacityValue {
        a: a.clone(),
        value: volume_bound(a),
        source: Source::Volume,
        exactness: Exactness::Exact,
    })
}

/// The anchor points `6 + 1/k` whose point searches feed the obstruction
/// evaluator between 6 and `7 1/32`, with their degree cutoffs.
fn anchor_points() -> Vec<(Rational, u64)> {
    (1..=8i64)
        .map(|k| {
            let a = Rational::from_integer(BigInt::from(6))
                + Rational::new(BigInt::one(), BigInt::from(k));
            let d = d_upper_bound(&a, Regime::Interval6).unwrap_or(DEGENERATE_ANCHOR_D);
            (a, d)
        })
        .collect()
}

type AnchorCache = Mutex<HashMap<(String, u64), Vec<ExClass>>>;

fn anchor_classes(center: &Rational, d_max: u64) -> Vec<ExClass> {
    static CACHE: OnceLock<AnchorCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (center.to_string(), d_max);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let classes = sol_less(center, d_max)
        .map(|r| r.reducing_classes())
        .unwrap_or_default();
    cache.lock().unwrap().insert(key, classes.clone());
    classes
}

/// Named families with degree at most `d_max`: the staircase classes and
/// the `b_k(i)` classes, plus the finite list with at most seven
/// multiplicities.
fn family_classes(d_max: u64) -> Vec<ExClass> {
    let cap = Rational::from_integer(BigInt::from(d_max));
    let mut out: Vec<ExClass> = enumerate_e7(DEFAULT_MAX_STEPS)
        .into_iter()
        .filter(|c| !c.is_sentinel() && c.d() <= &cap)
        .collect();
    for n in 0.. {
        let cls = class_e_alpha(n).expect("constructible");
        if cls.d() > &cap {
            break;
        }
        out.push(cls);
    }
    for n in 0.. {
        let cls = class_e_beta(n).expect("constructible");
        if cls.d() > &cap {
            break;
        }
        out.push(cls);
    }
    for k in 1.. {
        let first = class_e_b(k, 0).expect("constructible");
        if first.d() > &cap {
            break;
        }
        for i in 0.. {
            let cls = class_e_b(k, i).expect("constructible");
            if cls.d() > &cap {
                break;
            }
            out.push(cls);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The verified classes the obstruction evaluator ranges over at `a`:
/// the named families and the finite list with degree at most `d_max`,
/// the point search at `a`, and (between 6 and `7 1/32`) the point
/// searches at the anchor points `6 + 1/k`.
pub fn candidate_pool(a: &Rational, d_max: u64) -> Result<Vec<ExClass>> {
    let cap = Rational::from_integer(BigInt::from(d_max));
    let ceiling = Rational::new(BigInt::from(225), BigInt::from(32));
    let mut candidates = family_classes(d_max);
    if a > &Rational::one() {
        candidates.extend(sol_less(a, d_max)?.reducing_classes());
    }
    let six = Rational::from_integer(BigInt::from(6));
    if a > &six && a < &ceiling {
        for (center, d_anchor) in anchor_points() {
            candidates.extend(
                anchor_classes(&center, d_anchor)
                    .into_iter()
                    .filter(|c| c.d() <= &cap),
            );
        }
    }
    candidates.sort();
    candidates.dedup();
    Ok(candidates)
}

/// A certified lower bound for `c(a)`: the maximum of the volume bound and
/// the constraints of every verified class the searches produce with
/// degree at most `d_max`. The result is labeled exact when the degree
/// budget reaches the applicable analytic bound; the label leans on the
/// regional structure of the function (which classes can bind where), with
/// the margin bound capping the degree of anything that could beat an
/// attained value.
pub fn c_from_obstructions(a: &Rational, d_max: u64) -> Result<CapacityValue> {
    if a < &Rational::one() {
        return Err(Error::Domain(format!("c(a) is defined for a >= 1, got {a}")));
    }
    let eight = Rational::from_integer(BigInt::from(8));
    let ceiling = Rational::new(BigInt::from(225), BigInt::from(32));
    let candidates = candidate_pool(a, d_max)?;

    let vol = volume_bound(a);
    let half_a = a / Rational::from_integer(BigInt::from(2));
    let mut best: Option<(Rational, ExClass)> = None;
    for cls in candidates {
        let value = mu(&cls, a)?;
        if best.as_ref().is_none_or(|(cur, _)| &value > cur) {
            best = Some((value, cls));
        }
    }
    let above_volume = best.as_ref().is_some_and(|(value, _)| {
        crate::exactnum::cmp_rational_vs_sqrt(value, &half_a) == Ordering::Greater
    });

    let (value, source) = if above_volume {
        let (value, cls) = best.expect("nonempty");
        (QuadExt::rational(value), Source::ObstructionClass(cls))
    } else {
        (vol, Source::Volume)
    };

    // Certification. Above 8 nothing obstructs; on [225/32, 8) degree 13
    // suffices; an attained value strictly above the volume curve bounds
    // everything that could beat it; and the volume-touching staircase
    // corners are pinned by intersection positivity against the
    // alpha-classes.
    let exactness = if a >= &eight {
        Exactness::Exact
    } else if a >= &ceiling {
        if d_max >= 13 {
            Exactness::Exact
        } else {
            Exactness::LowerBound
        }
    } else if let Source::ObstructionClass(_) = source {
        let attained = value.as_rational().expect("obstruction values are rational");
        match beating_degree_bound(a, attained) {
            Some(bound) if d_max >= bound => Exactness::Exact,
            _ => Exactness::LowerBound,
        }
    } else if is_alpha_point(a) {
        Exactness::Exact
    } else {
        Exactness::LowerBound
    };

    Ok(CapacityValue {
        a: a.clone(),
        value,
        source,
        exactness,
    })
}

/// Is `a` exactly one of the staircase corners `alpha_n`?
fn is_alpha_point(a: &Rational) -> bool {
    if above_sigma_squared(a) {
        return false;
    }
    for n in 0.. {
        let al = alpha(n);
        match al.cmp(a) {
            Ordering::Equal => return true,
            Ordering::Greater => return false,
            Ordering::Less => {}
        }
        if n > 10_000 {
            return false;
        }
    }
    false
}

/// A degree budget that makes `c_from_obstructions(a, .)` provably exact:
/// per region, the analytic bound plus whatever the attaining family class
/// needs.
pub fn exact_search_bound(a: &Rational) -> Result<u64> {
    if a < &Rational::one() {
        return Err(Error::Domain(format!("c(a) is defined for a >= 1, got {a}")));
    }
    let eight = Rational::from_integer(BigInt::from(8));
    let ceiling = Rational::new(BigInt::from(225), BigInt::from(32));
    let six = Rational::from_integer(BigInt::from(6));
    if a >= &eight {
        return Ok(0);
    }
    if a >= &ceiling {
        return Ok(13);
    }
    if a > &six {
        // Own interval bound plus the bounds at the adjacent anchor points
        // (whose classes can bind strictly inside the open interval).
        let mut d = d_upper_bound(a, Regime::Interval6).unwrap_or(DEGENERATE_ANCHOR_D);
        for (center, d_anchor) in anchor_points() {
            let gap = (a - &center).abs();
            if gap < Rational::new(BigInt::one(), BigInt::from(6)) {
                d = d.max(d_anchor);
            }
        }
        return Ok(d);
    }
    if above_sigma_squared(a) {
        return d_upper_bound(a, Regime::Staircase);
    }
    // Staircase: the closed-form value is attained by a beta-class; its
    // degree plus the margin bound certifies the supremum.
    let closed = c_closed_form(a)?;
    let attain = match closed.source {
        Source::StaircaseLinear { n } => class_e_beta(n)?,
        Source::StaircaseFlat { n } if n > 0 => class_e_beta(n - 1)?,
        _ => ExClass::new_int(1, 0, vec![1]),
    };
    let attain_d = attain.d().to_integer().to_u64().expect("fits");
    let margin = closed
        .value
        .as_rational()
        .and_then(|r| beating_degree_bound(a, r))
        .unwrap_or(0);
    Ok(attain_d.max(margin).max(5))
}

/// `p_k = (k/2) / c(k)^2`, the packing number of the cube by `k` balls.
pub fn packing_number_cube(k: u64) -> Result<Rational> {
    if k < 1 {
        return Err(Error::Domain("packing numbers start at k = 1".into()));
    }
    let a = Rational::from_integer(BigInt::from(k));
    let c = c_closed_form(&a)?;
    Ok(&a / Rational::from_integer(BigInt::from(2)) / c.squared())
}
