//! Numeric backends.
//!
//! Every algorithm in this crate is generic over [`Scalar`]. Two backends are
//! provided: [`Rational`] (arbitrary precision, all identities hold exactly)
//! and `f64` (fast, compared against an absolute tolerance).

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// A field element usable as a probability or as the value of a random variable.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Tolerance used when the caller does not supply one: 0 for exact
    /// arithmetic, `1e-12` for floating point.
    fn default_tol() -> f64 {
        if Self::EXACT {
            0.0
        } else {
            1e-12
        }
    }

    /// Lossless for `f64`; the exact binary value for rationals.
    fn from_f64(x: f64) -> Option<Self>;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Exact for [`Rational`], nearest value for `f64`.
    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// `|self| <= tol`. With `tol == 0` this is an exact zero test.
    fn abs_within(&self, tol: f64) -> bool;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn within(&self, other: &Self, tol: f64) -> bool {
        (self.clone() - other.clone()).abs_within(tol)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `max(-self, 0)`.
    fn neg_part(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            Self::zero()
        }
    }

    /// `max(self, 0)`.
    fn pos_part(&self) -> Self {
        if self.is_positive() {
            self.clone()
        } else {
            Self::zero()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn abs_within(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn abs_within(&self, tol: f64) -> bool {
        if tol <= 0.0 {
            return self.is_zero();
        }
        match BigRational::from_float(tol) {
            Some(t) => self.abs() <= t,
            None => true,
        }
    }
}

/// Parses a rational from either a fraction (`"3/4"`), an integer, or a
/// decimal literal with optional exponent (`"0.25"`, `"1e-3"`). Decimal
/// literals are read as the decimal value they spell, so `"0.1"` is exactly
/// one tenth.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if text.contains('/') {
        return BigRational::from_str(text).ok();
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut denom = BigInt::one();
    if scale >= 0 {
        numer *= num_traits::pow(ten, scale as usize);
    } else {
        denom = num_traits::pow(ten, (-scale) as usize);
    }
    if negative {
        numer = -numer;
    }
    Some(BigRational::new(numer, denom))
}

/// Converts a finite `f64` to the rational spelled by its shortest decimal
/// representation (`0.1` becomes `1/10`, not the nearest binary fraction).
pub fn decimal_rational(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse_rational(&format!("{x:e}"))
}
