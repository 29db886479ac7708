//! Exact scalar arithmetic: arbitrary-precision rationals and the real
//! quadratic extension `Q(sqrt(r))`.
//!
//! Every strict inequality in the capacity computation (`mu` against
//! `sqrt(a/2)`, `y(a)` against `1/q`, interval membership against quadratic
//! irrational endpoints) is decided here with integer arithmetic. Floating
//! point appears only in output rendering, never in a decision.

use crate::{Error, Result};
use num_bigint::BigInt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// The universal exact scalar. Always stored in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// `p/q` as an exact rational. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(big(p), big(q))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(big(n))
}

/// Parses a rational literal: `"p/q"`, an integer, or the mixed form
/// `"n+p/q"` used for numbers like `6+1/5`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_plain = |t: &str| -> Result<Rational> {
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {t:?}")));
            }
            Ok(Rational::new(p, q))
        } else {
            let n: BigInt = t
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer {t:?}")))?;
            Ok(Rational::from_integer(n))
        }
    };
    if let Some((whole, frac)) = s.split_once('+') {
        Ok(parse_plain(whole)? + parse_plain(frac)?)
    } else {
        parse_plain(s)
    }
}

/// Largest integer `n` with `n <= x`.
pub fn floor_to_int(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// Smallest integer `n` with `n >= x`.
pub fn ceil_to_int(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// Largest integer `n >= 0` with `n^2 <= x`. Requires `x >= 0`.
pub fn floor_sqrt(x: &Rational) -> BigInt {
    assert!(!x.is_negative(), "floor_sqrt of negative rational");
    // floor(sqrt(x)) == isqrt(floor(x)) for rational x >= 0.
    floor_to_int(x).sqrt()
}

/// Smallest integer `n >= 0` with `n^2 >= x`. Requires `x >= 0`.
pub fn ceil_sqrt(x: &Rational) -> BigInt {
    let f = floor_sqrt(x);
    if Rational::from_integer(f.clone() * f.clone()) == *x {
        f
    } else {
        f + 1
    }
}

/// Rational bracket `lo <= sqrt(x) <= hi` with `hi - lo = 10^-digits`.
/// Requires `x >= 0`.
pub fn sqrt_bounds(x: &Rational, digits: u32) -> (Rational, Rational) {
    assert!(!x.is_negative(), "sqrt_bounds of negative rational");
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = x * Rational::from_integer(&scale * &scale);
    let lo_num = floor_sqrt(&scaled);
    (
        Rational::new(lo_num.clone(), scale.clone()),
        Rational::new(lo_num + 1, scale),
    )
}

/// Exact ordering of a rational against `sqrt(radicand)`.
///
/// Equivalent to splitting on the sign of `lhs` and then comparing `lhs^2`
/// with `radicand`. Requires `radicand >= 0`.
pub fn cmp_rational_vs_sqrt(lhs: &Rational, radicand: &Rational) -> Ordering {
    assert!(!radicand.is_negative(), "negative radicand");
    if lhs.is_negative() {
        return Ordering::Less;
    }
    (lhs * lhs).cmp(radicand)
}

/// Exact number of the form `x + y*sqrt(r)` with rational `x`, `y` and a
/// fixed positive radicand.
///
/// The radicand is normalized on construction: `sqrt(p/q)` is rewritten as
/// `sqrt(p*q)/q` and square factors of the integer radicand are pulled out,
/// so a perfect-square radicand collapses to a pure rational and equality is
/// plain field equality. Values with `y == 0` are radicand-agnostic and
/// combine with any other value; combining two genuinely irrational values
/// with different radicands is a hard error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadExt {
    x: Rational,
    y: Rational,
    /// Positive square-reduced integer radicand; `1` whenever `y == 0`.
    r: BigInt,
}

/// Pulls the largest detectable square factor out of `n`, returning
/// `(s, m)` with `n == s^2 * m`. Trial division covers square factors with
/// a prime part below 10^4; a final perfect-square check catches the rest.
fn reduce_square_factors(mut n: BigInt) -> (BigInt, BigInt) {
    debug_assert!(n.is_positive());
    let mut s = BigInt::one();
    let mut d = big(2);
    while &d * &d <= n && d < big(10_000) {
        let dd = &d * &d;
        while (&n % &dd).is_zero() {
            n /= &dd;
            s *= &d;
        }
        d += 1;
    }
    let root = n.sqrt();
    if &root * &root == n {
        s *= &root;
        n = BigInt::one();
    }
    (s, n)
}

impl QuadExt {
    /// A pure rational viewed as an element of any quadratic extension.
    pub fn rational(x: Rational) -> Self {
        QuadExt {
            x,
            y: Rational::zero(),
            r: BigInt::one(),
        }
    }

    /// `x + y*sqrt(r)`. Requires `r >= 0`.
    pub fn new(x: Rational, y: Rational, r: Rational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Domain(format!("negative radicand {r}")));
        }
        if y.is_zero() || r.is_zero() {
            return Ok(QuadExt::rational(x));
        }
        // sqrt(p/q) = sqrt(p*q) / q
        let p = r.numer().clone();
        let q = r.denom().clone();
        let y = y * Rational::new(BigInt::one(), q.clone());
        let (s, m) = reduce_square_factors(p * q);
        let y = y * Rational::from_integer(s);
        if m.is_one() {
            Ok(QuadExt::rational(x + y))
        } else {
            Ok(QuadExt { x, y, r: m })
        }
    }

    /// `sqrt(r)` for `r >= 0`.
    pub fn sqrt_of(r: Rational) -> Result<Self> {
        QuadExt::new(Rational::zero(), Rational::one(), r)
    }

    pub fn zero() -> Self {
        QuadExt::rational(Rational::zero())
    }

    pub fn rational_part(&self) -> &Rational {
        &self.x
    }

    pub fn surd_coefficient(&self) -> &Rational {
        &self.y
    }

    /// The normalized radicand. `1` for pure rationals.
    pub fn radicand(&self) -> Rational {
        Rational::from_integer(self.r.clone())
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.is_rational() {
            Some(&self.x)
        } else {
            None
        }
    }

    fn merged_radicand(&self, other: &Self) -> BigInt {
        if self.y.is_zero() {
            other.r.clone()
        } else if other.y.is_zero() || self.r == other.r {
            self.r.clone()
        } else {
            panic!(
                "mixed radicands: sqrt({}) vs sqrt({}); convert explicitly",
                self.r, other.r
            );
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let r = self.merged_radicand(other);
        QuadExt {
            x: &self.x + &other.x,
            y: &self.y + &other.y,
            r,
        }
        .canonical()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QuadExt {
            x: -self.x.clone(),
            y: -self.y.clone(),
            r: self.r.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let r = self.merged_radicand(other);
        let rr = Rational::from_integer(r.clone());
        QuadExt {
            x: &self.x * &other.x + &self.y * &other.y * rr,
            y: &self.x * &other.y + &self.y * &other.x,
            r,
        }
        .canonical()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        QuadExt {
            x: &self.x * c,
            y: &self.y * c,
            r: self.r.clone(),
        }
        .canonical()
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        // 1/(x + y sqrt r) = (x - y sqrt r) / (x^2 - y^2 r)
        let rr = Rational::from_integer(self.r.clone());
        let norm = &self.x * &self.x - &self.y * &self.y * rr;
        assert!(!norm.is_zero(), "division by zero QuadExt");
        let inv = norm.recip();
        QuadExt {
            x: &self.x * &inv,
            y: -(&self.y * &inv),
            r: self.r.clone(),
        }
        .canonical()
    }

    fn canonical(mut self) -> Self {
        if self.y.is_zero() {
            self.r = BigInt::one();
        }
        self
    }

    /// Exact sign of the real number `x + y*sqrt(r)`: `-1`, `0` or `+1`.
    pub fn sign(&self) -> i8 {
        let sx = rational_sign(&self.x);
        let sy = rational_sign(&self.y);
        if sy == 0 {
            return sx;
        }
        if sx == 0 {
            return sy;
        }
        if sx == sy {
            return sx;
        }
        // Opposite signs: compare x^2 against y^2 * r.
        let lhs = &self.x * &self.x;
        let rhs = &self.y * &self.y * Rational::from_integer(self.r.clone());
        match lhs.cmp(&rhs) {
            Ordering::Greater => sx,
            Ordering::Less => sy,
            Ordering::Equal => 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign() == 0
    }

    /// Exact ordering of two values in the same (or a compatible) field.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        match self.sub(other).sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// `floor(self * 10^digits)` computed exactly.
    fn scaled_floor(&self, digits: u32) -> BigInt {
        let scale = Rational::from_integer(BigInt::from(10u32).pow(digits));
        let a = &self.x * &scale;
        if self.y.is_zero() {
            return floor_to_int(&a);
        }
        let b = &self.y * &scale;
        // Starting guess: floor(a) + floor(b*sqrt(r)), then fix up by exact
        // sign tests (the guess is within one of the true floor).
        let b2r = &b * &b * Rational::from_integer(self.r.clone());
        let surd = if b.is_negative() {
            -ceil_sqrt(&b2r)
        } else {
            floor_sqrt(&b2r)
        };
        let mut n = floor_to_int(&a) + surd;
        let ge = |n: &BigInt| -> bool {
            // a + b*sqrt(r) >= n ?
            QuadExt {
                x: &a - Rational::from_integer(n.clone()),
                y: b.clone(),
                r: self.r.clone(),
            }
            .sign()
                >= 0
        };
        while !ge(&n) {
            n -= 1;
        }
        while ge(&(&n + 1)) {
            n += 1;
        }
        n
    }

    /// Decimal rendering with `digits` digits after the point, floor-rounded,
    /// derived from exact arithmetic.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scaled = self.scaled_floor(digits);
        let negative = scaled.is_negative();
        let abs = scaled.magnitude().to_string();
        let scale = digits as usize;
        let (int_part, frac_part) = if abs.len() > scale {
            let split = abs.len() - scale;
            (abs[..split].to_string(), abs[split..].to_string())
        } else {
            ("0".to_string(), format!("{:0>width$}", abs, width = scale))
        };
        let sign = if negative { "-" } else { "" };
        if scale == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    /// Approximate `f64` value, for output convenience only.
    pub fn to_f64(&self) -> f64 {
        let x = self.x.to_f64().unwrap_or(f64::NAN);
        if self.y.is_zero() {
            return x;
        }
        let y = self.y.to_f64().unwrap_or(f64::NAN);
        let r = self.r.to_f64().unwrap_or(f64::NAN);
        x + y * r.sqrt()
    }
}

fn rational_sign(x: &Rational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Exact sign of `x + y*sqrt(r)`.
pub fn quad_sign(v: &QuadExt) -> i8 {
    v.sign()
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            return write!(f, "{}", self.x);
        }
        if self.x.is_zero() && self.y.is_positive() {
            // Pure surd: render as sqrt(y^2 r), which re-parses exactly.
            let v = &self.y * &self.y * Rational::from_integer(self.r.clone());
            return write!(f, "sqrt({v})");
        }
        if self.y.is_positive() {
            write!(f, "{} + {}*sqrt({})", self.x, self.y, self.r)
        } else {
            write!(f, "{} - {}*sqrt({})", self.x, -self.y.clone(), self.r)
        }
    }
}

/// Parses the exact forms produced by [`QuadExt`]'s `Display`:
/// `"p/q"`, `"sqrt(p/q)"`, and `"x +/- y*sqrt(r)"`.
pub fn parse_exact(s: &str) -> Result<QuadExt> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
        return QuadExt::sqrt_of(parse_rational(inner)?);
    }
    if let Some(pos) = s.find("sqrt(") {
        let inner = s[pos..]
            .strip_prefix("sqrt(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("malformed surd in {s:?}")))?;
        let r = parse_rational(inner)?;
        let head = &s[..pos];
        let head = head
            .strip_suffix('*')
            .ok_or_else(|| Error::Parse(format!("expected y*sqrt(r) in {s:?}")))?;
        // Split "x + y" / "x - y" scanning from the right for the sign that
        // separates the two terms.
        let bytes = head.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] == b' ' {
                split = Some(i);
                break;
            }
        }
        let (x, y) = match split {
            Some(i) => {
                let x = parse_rational(&head[..i - 1])?;
                let y = parse_rational(head[i + 1..].trim())?;
                if bytes[i] == b'-' {
                    (x, -y)
                } else {
                    (x, y)
                }
            }
            None => (Rational::zero(), parse_rational(head)?),
        };
        return QuadExt::new(x, y, r);
    }
    Ok(QuadExt::rational(parse_rational(s)?))
}
