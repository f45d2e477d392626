//! Capped univariate polynomials in the capital variable `t`.
//!
//! A [`CappedPolynomial`] is a dense coefficient vector over the closed
//! exponent range `[support.min, support.max]`. Shifting never leaves that
//! range: mass pushed below the floor piles up at the floor and mass pushed
//! past the cap piles up at the cap. This is how "no negative chicks" and
//! "at least N chicks wins" are both expressed without special cases.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_fraction, Rational};

/// Inclusive exponent range of a capped polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Support {
    pub min: i64,
    pub max: i64,
}

impl Support {
    pub fn new(min: i64, max: i64) -> Result<Self, PolyError> {
        if min > max {
            return Err(PolyError::InvertedSupport { min, max });
        }
        Ok(Support { min, max })
    }

    pub fn len(&self) -> usize {
        (self.max - self.min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, exponent: i64) -> bool {
        (self.min..=self.max).contains(&exponent)
    }

    pub fn clamp(&self, exponent: i64) -> i64 {
        exponent.clamp(self.min, self.max)
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("inverted support bounds: min {min} > max {max}")]
    InvertedSupport { min: i64, max: i64 },
    #[error("exponent {exponent} outside support {support}")]
    OutOfSupport { exponent: i64, support: Support },
    #[error("support mismatch: {left} vs {right}")]
    SupportMismatch { left: Support, right: Support },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CappedPolynomial {
    support: Support,
    coeffs: Vec<Rational>,
}

impl CappedPolynomial {
    pub fn zero(support: Support) -> Self {
        CappedPolynomial {
            support,
            coeffs: vec![Rational::zero(); support.len()],
        }
    }

    /// Zero polynomial over `[min, max]`; fails on inverted bounds.
    pub fn zero_on(min: i64, max: i64) -> Result<Self, PolyError> {
        Ok(Self::zero(Support::new(min, max)?))
    }

    pub fn monomial(exponent: i64, coeff: Rational, support: Support) -> Result<Self, PolyError> {
        if !support.contains(exponent) {
            return Err(PolyError::OutOfSupport { exponent, support });
        }
        let mut poly = Self::zero(support);
        poly.coeffs[(exponent - support.min) as usize] = coeff;
        Ok(poly)
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(support: Support, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        let mut poly = Self::zero(support);
        for (exponent, coeff) in terms {
            if !support.contains(exponent) {
                return Err(PolyError::OutOfSupport { exponent, support });
            }
            poly.coeffs[(exponent - support.min) as usize] += coeff;
        }
        Ok(poly)
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn coeff(&self, exponent: i64) -> Rational {
        if self.support.contains(exponent) {
            self.coeffs[(exponent - self.support.min) as usize].clone()
        } else {
            Rational::zero()
        }
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        let min = self.support.min;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, c)| (min + k as i64, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        let mut sum = self.clone();
        sum.add_assign(other)?;
        Ok(sum)
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<(), PolyError> {
        self.check_support(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
        Ok(())
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        CappedPolynomial {
            support: self.support,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Moves the coefficient at `j` to `clamp(j + delta)`.
    pub fn shift_clamped(&self, delta: i64) -> Self {
        let mut out = Self::zero(self.support);
        out.add_scaled_shift(self, &Rational::from_integer(BigInt::from(1)), delta);
        out
    }

    /// `self += clamp_shift(scale(src, factor), delta)` without intermediates.
    ///
    /// The caller guarantees both polynomials share a support.
    pub(crate) fn add_scaled_shift(&mut self, src: &Self, factor: &Rational, delta: i64) {
        debug_assert_eq!(self.support, src.support);
        let support = self.support;
        for (exponent, coeff) in src.terms() {
            let target = (support.clamp(exponent + delta) - support.min) as usize;
            self.coeffs[target] += coeff * factor;
        }
    }

    /// Value at `t = 1`.
    pub fn mass(&self) -> Rational {
        self.coeffs.iter().sum()
    }

    /// `Σ j^r · c_j` over the support.
    pub fn power_moment(&self, order: u32) -> Rational {
        self.terms()
            .map(|(j, c)| c * Rational::from_integer(BigInt::from(j).pow(order)))
            .sum()
    }

    /// Every coefficient lies in `[0, 1]` and so does the total.
    pub fn is_subprobability(&self) -> bool {
        let one = Rational::from_integer(BigInt::from(1));
        self.coeffs.iter().all(|c| !c.is_negative() && *c <= one) && self.mass() <= one
    }

    fn check_support(&self, other: &Self) -> Result<(), PolyError> {
        if self.support != other.support {
            return Err(PolyError::SupportMismatch {
                left: self.support,
                right: other.support,
            });
        }
        Ok(())
    }
}

impl fmt::Display for CappedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (exponent, coeff) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{}*t^{}", format_fraction(coeff), exponent)?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
