//! Scalar abstractions.
//!
//! Two layers: [`Field`] covers anything that can carry a probability
//! (floats and exact rationals), [`Real`] adds the transcendental operations
//! needed by the complex linear algebra in [`crate::matcore`].

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive, Zero};

use crate::matcore::ToleranceConfig;

/// Ordered field used for probabilities and LP arithmetic.
///
/// Exact implementations (`BigRational`) ignore tolerances: comparisons made
/// through [`Field::within`] are exact.
pub trait Field:
    Clone + Debug + Display + PartialOrd + Num + Neg<Output = Self> + FromPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn abs_val(&self) -> Self;

    fn as_f64(&self) -> f64;

    /// `n / d` as a field element.
    fn ratio(n: i64, d: i64) -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in field")
    }

    /// `|self| <= eps`, exactly zero for exact fields.
    fn within(&self, eps: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.abs_val().as_f64() <= eps
        }
    }

    /// `self > eps`, strictly positive for exact fields.
    fn above(&self, eps: f64) -> bool {
        if Self::EXACT {
            *self > Self::zero()
        } else {
            self.as_f64() > eps
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

/// Floating-point scalar for complex matrices: `f32` or `f64`.
pub trait Real: Float + Field + Copy {
    /// Tolerances scaled to the precision of the type.
    fn default_tolerances() -> ToleranceConfig;

    fn from_f64_lossy(v: f64) -> Self;

    fn pi() -> Self {
        Self::from_f64_lossy(std::f64::consts::PI)
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
}

impl Field for f32 {
    const EXACT: bool = false;

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn as_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn ratio(n: i64, d: i64) -> Self {
        (n as f64 / d as f64) as f32
    }
}

impl Field for BigRational {
    const EXACT: bool = true;

    fn abs_val(&self) -> Self {
        num_traits::Signed::abs(self)
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn ratio(n: i64, d: i64) -> Self {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
}

impl Real for f64 {
    fn default_tolerances() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn from_f64_lossy(v: f64) -> Self {
        v
    }
}

impl Real for f32 {
    fn default_tolerances() -> ToleranceConfig {
        ToleranceConfig {
            herm: 1e-5,
            psd: 1e-5,
            support: 1e-5,
            prob: 1e-4,
        }
    }

    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }
}

/// Parse a probability written as an integer, a fraction `n/d` or a finite
/// decimal (`0.125`, `1e-3`) into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// Render a rational as `n` or `n/d`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/4"), Some(BigRational::ratio(1, 4)));
        assert_eq!(parse_rational("0.25"), Some(BigRational::ratio(1, 4)));
        assert_eq!(parse_rational("-1.5e-1"), Some(BigRational::ratio(-3, 20)));
        assert_eq!(parse_rational("3"), Some(BigRational::ratio(3, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn exact_field_ignores_tolerance() {
        let tiny = BigRational::ratio(1, 1_000_000_000_000);
        assert!(!tiny.within(1e-3));
        assert!(1e-12_f64.within(1e-9));
        assert!(tiny.above(1e-3));
    }

    #[test]
    fn formats_rationals() {
        assert_eq!(format_rational(&BigRational::ratio(2, 8)), "1/4");
        assert_eq!(format_rational(&BigRational::ratio(4, 2)), "2");
    }
}
