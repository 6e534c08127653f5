//! Scalar arithmetic used across the crate.
//!
//! Graph lengths and exact identities use [`Q`] (arbitrary precision
//! rationals). Measures coming out of the LP solver use `f64`. Code that has
//! to work in both modes is generic over [`Scalar`].

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational number.
pub type Q = BigRational;

/// Comparison tolerance for double mode.
pub const F64_TOLERANCE: f64 = 1e-9;

/// Which arithmetic to use for cut measures and derived metrics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    #[default]
    Rational,
    Double,
}

impl FromStr for ScalarMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(ScalarMode::Rational),
            "double" => Ok(ScalarMode::Double),
            other => Err(format!("unknown scalar mode `{other}`")),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + 'static
{
    fn from_q(q: &Q) -> Self;

    fn to_f64(&self) -> f64;

    /// Equality up to the mode's tolerance (exact for rationals).
    fn approx_eq(&self, other: &Self) -> bool;

    /// Strictly positive beyond the mode's tolerance.
    fn is_positive(&self) -> bool;

    /// Lossless text form: `p/q` for rationals, shortest round-trip decimal
    /// for doubles.
    fn to_text(&self) -> String;

    fn from_text(text: &str) -> Option<Self>;

    fn abs_diff(&self, other: &Self) -> Self {
        if self >= other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }

    /// `self <= other` up to tolerance.
    fn approx_le(&self, other: &Self) -> bool {
        self <= other || self.approx_eq(other)
    }
}

impl Scalar for Q {
    fn from_q(q: &Q) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        q_to_f64(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn to_text(&self) -> String {
        format_q(self)
    }

    fn from_text(text: &str) -> Option<Self> {
        parse_q(text).ok()
    }
}

impl Scalar for f64 {
    fn from_q(q: &Q) -> Self {
        q_to_f64(q)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= F64_TOLERANCE * scale
    }

    fn is_positive(&self) -> bool {
        *self > F64_TOLERANCE
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }

    fn from_text(text: &str) -> Option<Self> {
        text.trim().parse().ok()
    }
}

/// A scalar or `+inf`. Used for efficiencies of collapsed segments and for
/// distortions of non-injective maps.
#[derive(Clone, Debug, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Extended<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// `self <= bound` up to tolerance; infinity exceeds every bound.
    pub fn approx_le(&self, bound: &T) -> bool {
        match self {
            Extended::Finite(x) => x.approx_le(bound),
            Extended::Infinite => false,
        }
    }

    /// `bound <= self` up to tolerance.
    pub fn approx_ge(&self, bound: &T) -> bool {
        match self {
            Extended::Finite(x) => bound.approx_le(x),
            Extended::Infinite => true,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Extended::Finite(x) => x.to_text(),
            Extended::Infinite => "inf".to_string(),
        }
    }

    pub fn from_text(text: &str) -> Option<Self> {
        if text.trim() == "inf" {
            Some(Extended::Infinite)
        } else {
            T::from_text(text).map(Extended::Finite)
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Finite(x) => x.to_f64(),
            Extended::Infinite => f64::INFINITY,
        }
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Very large numerators/denominators: shift both down first.
            let bits = q.numer().bits().max(q.denom().bits()) as i64 - 1000;
            let shift = bits.max(0) as usize;
            let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn format_q(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational")]
    Empty,
    #[error("malformed integer `{0}`")]
    BadInteger(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_q(text: &str) -> Result<Q, ParseRationalError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| ParseRationalError::BadInteger(num.to_string()))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| ParseRationalError::BadInteger(den.to_string()))?;
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Q::new(num, den))
}

/// Exact `base^exp` for a small integer base.
pub fn q_pow(base: &Q, exp: u32) -> Q {
    let mut acc = Q::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}
