//! Exact arithmetic in the ordered field ℚ(√2).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::{parse_ratio, ratio_to_f64, Scalar};

/// Snapping accepts a candidate only within this absolute distance.
pub const SNAP_TOL: f64 = 1e-9;
/// Bound on `|p|` and `|q|` for snapping candidates `(p + q√2)/r`.
pub const SNAP_MAX_COEFF: i64 = 64;
/// Snapping denominators are the divisors of this power of two.
pub const SNAP_MAX_DEN: i64 = 1024;

/// A number `rational + irrational·√2` with both parts rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    rational: BigRational,
    irrational: BigRational,
}

impl QSqrt2 {
    pub fn new(rational: BigRational, irrational: BigRational) -> Self {
        Self { rational, irrational }
    }

    /// `(p + q√2) / r`.
    pub fn from_parts(p: i64, q: i64, r: i64) -> Self {
        let r = BigInt::from(r);
        Self::new(
            BigRational::new(BigInt::from(p), r.clone()),
            BigRational::new(BigInt::from(q), r),
        )
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, BigRational::zero())
    }

    pub fn sqrt2() -> Self {
        Self::from_parts(0, 1, 1)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.irrational
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero()
    }

    /// Galois conjugate `a - b√2`.
    pub fn conjugate(&self) -> Self {
        Self::new(self.rational.clone(), -self.irrational.clone())
    }

    /// Field norm `a² - 2b²`; zero only for zero.
    pub fn norm(&self) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        &self.rational * &self.rational - two * &self.irrational * &self.irrational
    }

    pub fn signum(&self) -> Ordering {
        let a = self.rational.cmp(&BigRational::zero());
        let b = self.irrational.cmp(&BigRational::zero());
        match (a, b) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            (a_sign, _) => {
                // Opposite signs: the larger of a² and 2b² wins.
                let a2 = &self.rational * &self.rational;
                let b2 = BigRational::from_integer(BigInt::from(2)) * &self.irrational * &self.irrational;
                match a2.cmp(&b2) {
                    Ordering::Greater => a_sign,
                    Ordering::Less => a_sign.reverse(),
                    Ordering::Equal => unreachable!("√2 is irrational"),
                }
            }
        }
    }

    /// Integers `(p, q, r)` with `self = (p + q√2)/r` and `r > 0` minimal.
    pub fn common_denominator_form(&self) -> (BigInt, BigInt, BigInt) {
        let r = self.rational.denom().lcm(self.irrational.denom());
        let p = self.rational.numer() * (&r / self.rational.denom());
        let q = self.irrational.numer() * (&r / self.irrational.denom());
        (p, q, r)
    }

    /// Finds the exact value `(p + q√2)/r` with `|p|, |q| ≤ 64` and `r | 1024`
    /// within [`SNAP_TOL`] of `x`.
    pub fn snap(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut r = 1;
        while r <= SNAP_MAX_DEN {
            let scaled = x * r as f64;
            for q in 0..=SNAP_MAX_COEFF {
                for q in [q, -q] {
                    let p = (scaled - q as f64 * sqrt2).round();
                    if p.abs() > SNAP_MAX_COEFF as f64 {
                        continue;
                    }
                    let candidate = (p + q as f64 * sqrt2) / r as f64;
                    if (candidate - x).abs() <= SNAP_TOL {
                        return Some(Self::from_parts(p as i64, q, r));
                    }
                }
            }
            r *= 2;
        }
        None
    }
}

impl fmt::Debug for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QSqrt2 {
    /// `"(p+q*sqrt2)/r"`, or `"p/r"` when the irrational part vanishes.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, q, r) = self.common_denominator_form();
        if q.is_zero() {
            write!(f, "{}/{}", p, r)
        } else if q.is_negative() {
            write!(f, "({}-{}*sqrt2)/{}", p, -q, r)
        } else {
            write!(f, "({}+{}*sqrt2)/{}", p, q, r)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed exact number {0:?}")]
pub struct ParseQSqrt2Error(pub String);

impl FromStr for QSqrt2 {
    type Err = ParseQSqrt2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseQSqrt2Error(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if !t.contains("sqrt2") {
            return parse_ratio(&t).map(Self::from_rational).ok_or_else(err);
        }
        let (inner, den) = match t.strip_prefix('(') {
            Some(rest) => {
                let close = rest.find(')').ok_or_else(err)?;
                let den = match &rest[close + 1..] {
                    "" => BigInt::one(),
                    d => d
                        .strip_prefix('/')
                        .and_then(|d| d.parse::<BigInt>().ok())
                        .ok_or_else(err)?,
                };
                (rest[..close].to_string(), den)
            }
            None => (t.clone(), BigInt::one()),
        };
        if den.is_zero() {
            return Err(err());
        }
        let body = inner.strip_suffix("*sqrt2").ok_or_else(err)?;
        // Split at the last sign that is not the leading one.
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (p, q) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let p: BigInt = p.parse().map_err(|_| err())?;
        let q: BigInt = q.strip_prefix('+').unwrap_or(q).parse().map_err(|_| err())?;
        Ok(Self::new(BigRational::new(p, den.clone()), BigRational::new(q, den)))
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QSqrt2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum()
    }
}

impl Add for QSqrt2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.rational + rhs.rational, self.irrational + rhs.irrational)
    }
}

impl Sub for QSqrt2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.rational - rhs.rational, self.irrational - rhs.irrational)
    }
}

impl Mul for QSqrt2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        let rational = &self.rational * &rhs.rational + two * &self.irrational * &rhs.irrational;
        let irrational = &self.rational * &rhs.irrational + &self.irrational * &rhs.rational;
        Self::new(rational, irrational)
    }
}

impl Div for QSqrt2 {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let norm = rhs.norm();
        assert!(!norm.is_zero(), "division by zero in Q(sqrt2)");
        let num = self * rhs.conjugate();
        Self::new(num.rational / &norm, num.irrational / norm)
    }
}

impl Neg for QSqrt2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.rational, -self.irrational)
    }
}

impl Zero for QSqrt2 {
    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }
}

impl One for QSqrt2 {
    fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }
}

impl Scalar for QSqrt2 {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_parts(num, 0, den)
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.rational) + ratio_to_f64(&self.irrational) * std::f64::consts::SQRT_2
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn format(&self) -> String {
        self.to_string()
    }

    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}
