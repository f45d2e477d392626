//! Exact rational scalars.
//!
//! Every probability in the engine is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. Nothing in the
//! evolution path ever rounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("malformed fraction {0:?}")]
    Malformed(String),
}

/// Builds `num/den` in lowest terms, sign on the numerator.
pub fn rat(num: i64, den: i64) -> Result<Rational, RationalError> {
    if den == 0 {
        return Err(RationalError::ZeroDenominator);
    }
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_fraction(text: &str) -> Result<Rational, RationalError> {
    let malformed = || RationalError::Malformed(text.to_string());
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| malformed())?;
    let den: BigInt = den.parse().map_err(|_| malformed())?;
    if den.is_zero() {
        return Err(RationalError::ZeroDenominator);
    }
    Ok(BigRational::new(num, den))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_fraction(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Correctly rounded fixed-point expansion with `digits` places after the
/// point. Ties round away from zero.
pub fn to_decimal(value: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = value.abs() * BigRational::from_integer(scale);
    let floor = scaled.floor().to_integer();
    let frac = scaled - BigRational::from_integer(floor.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let units = if frac >= half { floor + 1 } else { floor };
    render_scaled(value.is_negative() && !units.is_zero(), &units, digits)
}

/// Correctly rounded expansion of `±sqrt(square)`. Ties round away from zero.
pub fn sqrt_to_decimal(negative: bool, square: &Rational, digits: usize) -> String {
    assert!(!square.is_negative(), "square root of a negative rational");
    // round(sqrt(S)) for S = square * 10^(2 digits): with n = isqrt(floor(S)),
    // the answer is n + 1 exactly when S >= (n + 1/2)^2.
    let scale = BigInt::from(10u32).pow(2 * digits as u32);
    let scaled = square * BigRational::from_integer(scale);
    let n = scaled.floor().to_integer().sqrt();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mid = BigRational::from_integer(n.clone()) + half;
    let units = if scaled >= &mid * &mid { n + 1 } else { n };
    render_scaled(negative && !units.is_zero(), &units, digits)
}

/// Correctly rounded `d.ddd…e±x` form with `significant` digits.
pub fn to_scientific(value: &Rational, significant: usize) -> String {
    assert!(significant >= 1);
    if value.is_zero() {
        return format!("{}e0", to_decimal(value, significant - 1));
    }
    let ten = BigRational::from_integer(BigInt::from(10));
    let magnitude = value.abs();
    // Start from the bit-length estimate, then settle exactly.
    let estimate = ((magnitude.numer().bits() as f64 - magnitude.denom().bits() as f64) * std::f64::consts::LOG10_2)
        .floor() as i32;
    let mut exponent = estimate;
    let pow10 = |e: i32| {
        if e >= 0 {
            ten.pow(e)
        } else {
            ten.pow(-e).recip()
        }
    };
    while magnitude < pow10(exponent) {
        exponent -= 1;
    }
    while magnitude >= pow10(exponent + 1) {
        exponent += 1;
    }
    let mut mantissa = to_decimal(&(value / pow10(exponent)), significant - 1);
    if mantissa.trim_start_matches('-').starts_with("10") {
        exponent += 1;
        mantissa = to_decimal(&(value / pow10(exponent)), significant - 1);
    }
    format!("{mantissa}e{exponent}")
}

fn render_scaled(negative: bool, units: &BigInt, digits: usize) -> String {
    let (int_part, frac_part) = units.div_rem(&BigInt::from(10u32).pow(digits as u32));
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    let frac = frac_part.to_string();
    format!("{sign}{int_part}.{}{frac}", "0".repeat(digits - frac.len()))
}

/// Nearest `f64`, for presentation and Monte Carlo comparison only.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter storing a [`Rational`] as its `"p/q"` string.
pub mod fraction_str {
    use super::{format_fraction, parse_fraction, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_fraction(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_fraction(&text).map_err(serde::de::Error::custom)
    }
}
