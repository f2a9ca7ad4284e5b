//! Scalar abstraction shared by the table algebra and the LP solver.
//!
//! Every numeric routine in the crate is written against [`Scalar`], an
//! ordered field with exact-or-approximate equality. Exact implementations
//! ([`BigRational`] and [`QSqrt2`](crate::QSqrt2)) compare with `==`; the
//! float implementations compare within [`FLOAT_EQ_TOL`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Absolute tolerance used by `approx_eq` on float scalars.
pub const FLOAT_EQ_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// `true` when `approx_eq` is plain equality.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn approx_eq(&self, other: &Self) -> bool;

    /// Canonical string form used by the JSON formats.
    fn format(&self) -> String;

    fn parse(s: &str) -> Option<Self>;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn approx_zero(&self) -> bool {
        self.approx_eq(&Self::zero())
    }
}

/// Sum of a sequence of scalars.
pub fn sum<'a, S: Scalar, I: IntoIterator<Item = &'a S>>(items: I) -> S {
    items.into_iter().fold(S::zero(), |acc, x| acc + x.clone())
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn approx_eq(&self, other: &Self) -> bool {
                ((*self - *other) as f64).abs() <= FLOAT_EQ_TOL
            }

            fn format(&self) -> String {
                format!("{:?}", self)
            }

            fn parse(s: &str) -> Option<Self> {
                s.trim().parse().ok()
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn format(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn parse(s: &str) -> Option<Self> {
        parse_ratio(s)
    }
}

/// Parses `"a/b"`, `"a"` or `"-a/b"` into a reduced rational.
pub(crate) fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Very large parts: scale down before dividing.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900);
            let n = (r.numer().abs() >> shift).to_f64().unwrap_or(f64::MAX);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::MAX);
            let v = n / d;
            if num_traits::Signed::is_negative(r) {
                -v
            } else {
                v
            }
        }
    }
}
