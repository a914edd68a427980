//! Numeric mode plumbing shared by every engine.
//!
//! Each computation runs either over arbitrary-precision rationals or over
//! `f64`, selected by [`Mode`]. Internally the engines are generic over
//! [`Scalar`] so the two paths share one implementation; results surface as
//! [`ExactValue`], which remembers which mode produced them.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Arithmetic mode for an engine run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Arbitrary-precision rational arithmetic. Equality is exact.
    Exact,
    /// Double precision floating point.
    Float,
}

impl Mode {
    /// Default policy for the closed forms: exact rationals up to `n = 64`,
    /// floating point beyond.
    pub fn default_for(n: u64) -> Mode {
        if n <= 64 {
            Mode::Exact
        } else {
            Mode::Float
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Float => write!(f, "float"),
        }
    }
}

/// A number tagged with the arithmetic that produced it.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactValue {
    Exact(BigRational),
    Float(f64),
}

impl ExactValue {
    pub fn mode(&self) -> Mode {
        match self {
            ExactValue::Exact(_) => Mode::Exact,
            ExactValue::Float(_) => Mode::Float,
        }
    }

    /// Best f64 approximation, lossless in float mode.
    pub fn to_f64(&self) -> f64 {
        match self {
            ExactValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            ExactValue::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExactValue::Exact(r) => Some(r),
            ExactValue::Float(_) => None,
        }
    }

    pub fn from_u64(v: u64, mode: Mode) -> Self {
        match mode {
            Mode::Exact => ExactValue::Exact(BigRational::from_integer(BigInt::from(v))),
            Mode::Float => ExactValue::Float(v as f64),
        }
    }

    /// Renders rationals as `p/q` (or just `p` for integers) and floats with
    /// 17 significant digits, which round-trips `f64` exactly.
    pub fn display_exact_column(&self) -> String {
        match self {
            ExactValue::Exact(r) => format_rational(r),
            ExactValue::Float(_) => String::new(),
        }
    }

    pub fn display_float_column(&self) -> String {
        format_f64(self.to_f64())
    }
}

pub(crate) fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// 17 significant digits: enough to reconstruct the exact bit pattern.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses `"p/q"` or a plain decimal such as `"0.25"` into an exact rational.
pub(crate) fn parse_rational_text(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let numer = BigInt::parse_bytes(p.trim().as_bytes(), 10)?;
        let denom = BigInt::parse_bytes(q.trim().as_bytes(), 10)?;
        if denom.is_zero() {
            return None;
        }
        return Some(BigRational::new(numer, denom));
    }
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(BigInt::from(sign) * numer, denom))
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactValue::Exact(r) => write!(f, "{}", format_rational(r)),
            ExactValue::Float(x) => write!(f, "{x}"),
        }
    }
}

impl PartialOrd for ExactValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExactValue::Exact(a), ExactValue::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

/// The number field the generic engines run over.
///
/// Implemented for `BigRational` (exact) and `f64` (float). Operations take
/// owned values; generic code clones where it must, which is cheap for `f64`
/// and unavoidable for heap rationals.
pub trait Scalar:
    Clone
    + Send
    + Sync
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
{
    fn from_u64(v: u64) -> Self;
    /// Exact ratio p/q of machine integers.
    fn ratio(p: u64, q: u64) -> Self;
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for f64 {
    fn from_u64(v: u64) -> Self {
        v as f64
    }
    fn ratio(p: u64, q: u64) -> Self {
        p as f64 / q as f64
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn ratio(p: u64, q: u64) -> Self {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Wraps a scalar of either field back into an [`ExactValue`].
pub(crate) fn wrap<T: Scalar + 'static>(v: T) -> ExactValue {
    // The two implementors are known; dispatch by type id keeps the public
    // operations free of a second generic parameter.
    let any: &dyn std::any::Any = &v;
    if let Some(r) = any.downcast_ref::<BigRational>() {
        ExactValue::Exact(r.clone())
    } else if let Some(x) = any.downcast_ref::<f64>() {
        ExactValue::Float(*x)
    } else {
        unreachable!("Scalar is only implemented for BigRational and f64")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_display_uses_slash_form() {
        let v = ExactValue::Exact(BigRational::new(BigInt::from(19), BigInt::from(5)));
        assert_eq!(v.to_string(), "19/5");
        assert_eq!(
            ExactValue::Exact(BigRational::from_integer(BigInt::from(7))).to_string(),
            "7"
        );
    }

    #[test]
    fn float_column_round_trips() {
        let x = 3.799_999_999_999_542_4_f64;
        let s = format_f64(x);
        let back: f64 = s.parse().unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn wrap_dispatches_by_field() {
        assert_eq!(wrap(0.5_f64), ExactValue::Float(0.5));
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(wrap(half.clone()), ExactValue::Exact(half));
    }

    #[test]
    fn cross_mode_comparison_falls_back_to_f64() {
        let a = ExactValue::Exact(BigRational::new(BigInt::from(1), BigInt::from(2)));
        let b = ExactValue::Float(0.75);
        assert!(a < b);
    }
}
