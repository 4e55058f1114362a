//! Coefficient types.
//!
//! The symbolic layer is generic over a [`Coeff`] so the same polynomial code
//! runs exactly over [`Rational`] and approximately over `f64` (used by the
//! numeric oracles and the flow integrator).

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar, always stored in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Ring operations needed by [`crate::poly::Poly`].
pub trait Coeff:
    Clone + Debug + PartialEq + Num + std::ops::Neg<Output = Self> + FromPrimitive + Send + Sync
{
}

impl<T> Coeff for T where
    T: Clone + Debug + PartialEq + Num + std::ops::Neg<Output = T> + FromPrimitive + Send + Sync
{
}

/// Conversion from an exact rational, used when moving a certified polynomial
/// into a floating-point evaluation context.
pub trait FromRational: Sized {
    fn from_rational(q: &Rational) -> Self;
}

impl FromRational for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}

impl FromRational for f64 {
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("decimal literal `{0}` rejected: write rationals as p/q")]
    Decimal(String),
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// `n/d` as a rational. Panics on a zero denominator.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q` or a bare integer `p`. Decimal points and exponents are
/// rejected rather than silently converted.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if s.contains(['.', 'e', 'E']) {
        return Err(ParseRationalError::Decimal(s.to_string()));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
    let den = BigInt::from_str(den).map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `num/den` text form (denominator always written).
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Nearest-ish `f64`; exact for dyadic rationals that fit.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerator/denominator: scale both down before dividing.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = (nb.max(db) - 900).max(0) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    if d == 0.0 {
        if n == 0.0 {
            return 0.0;
        }
        return f64::INFINITY.copysign(n);
    }
    n / d
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_rational(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Largest dyadic `k/2^bits` not exceeding `x` (for `x >= 0`).
pub fn dyadic_floor(x: f64, bits: u32) -> Rational {
    let scale = 2f64.powi(bits as i32);
    let k = (x * scale).floor().max(0.0);
    Rational::new(
        BigInt::from_f64(k).unwrap_or_else(BigInt::zero),
        BigInt::one() << bits as usize,
    )
}

pub fn rabs(q: &Rational) -> Rational {
    q.abs()
}

pub fn pow_rational(q: &Rational, e: u32) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}

pub fn min_rational<'a>(items: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    items.into_iter().min().cloned()
}

pub(crate) mod serde_rational {
    //! Rationals travel through JSON as `"num/den"` strings.
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match q {
                Some(q) => s.serialize_some(&format_rational(q)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            let s = Option::<String>::deserialize(d)?;
            s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("1/4").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("0").unwrap(), int(0));
        assert_eq!(parse_rational(" 3 ").unwrap(), int(3));
    }

    #[test]
    fn rejects_decimals() {
        assert!(matches!(
            parse_rational("0.25"),
            Err(ParseRationalError::Decimal(_))
        ));
        assert!(matches!(
            parse_rational("1e-3"),
            Err(ParseRationalError::Decimal(_))
        ));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn format_is_lowest_terms() {
        assert_eq!(format_rational(&rat(6, -4)), "-3/2");
        assert_eq!(format_rational(&int(5)), "5/1");
    }

    #[test]
    fn huge_rationals_convert() {
        let big = Rational::new(BigInt::one() << 2000usize, (BigInt::one() << 1999usize) * 3);
        assert!((rational_to_f64(&big) - 2.0 / 3.0).abs() < 1e-15);
    }
}
