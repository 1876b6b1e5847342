//! Scalar kinds for orbit tuples: exact rationals and binary floats.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Which arithmetic backs a tuple. Exact kinds compare by equality, float
/// kinds through an explicit coincidence tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Rational,
    Float,
}

pub trait Scalar: Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static {
    const KIND: ScalarKind;

    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// A literal with both representations at hand.
    fn from_constant(exact: &Rational, approx: f64) -> Self;
    fn to_f64(&self) -> f64;

    /// Transcendental functions only exist for floats.
    fn sin(&self) -> Option<Self>;
    fn cos(&self) -> Option<Self>;
    fn exp(&self) -> Option<Self>;

    /// Real power; exact kinds only accept integer exponents.
    fn pow(&self, exponent: &Self) -> Option<Self>;

    fn abs_val(&self) -> Self;

    /// Total order used by sorting and classification. NaN never reaches
    /// here: map evaluation rejects non-finite values.
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }

    fn is_finite_value(&self) -> bool;
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_constant(_exact: &Rational, approx: f64) -> Self {
        approx
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sin(&self) -> Option<Self> {
        Some(f64::sin(*self))
    }

    fn cos(&self) -> Option<Self> {
        Some(f64::cos(*self))
    }

    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }

    fn pow(&self, exponent: &Self) -> Option<Self> {
        if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
            Some(self.powi(*exponent as i32))
        } else {
            Some(self.powf(*exponent))
        }
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Rational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_constant(exact: &Rational, _approx: f64) -> Self {
        exact.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sin(&self) -> Option<Self> {
        None
    }

    fn cos(&self) -> Option<Self> {
        None
    }

    fn exp(&self) -> Option<Self> {
        None
    }

    fn pow(&self, exponent: &Self) -> Option<Self> {
        if !exponent.is_integer() {
            return None;
        }
        let e = exponent.to_integer().to_i32()?;
        if e < 0 && self.is_zero() {
            return None;
        }
        Some(num_traits::Pow::pow(self, e))
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

/// Max-norm distance between two coordinate vectors, in f64.
pub fn max_distance<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs_val().to_f64())
        .fold(0.0, f64::max)
}

/// Exact rational from an f64 (every finite double is a dyadic rational).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_f64(v)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_one() -> Rational {
    Rational::one()
}
