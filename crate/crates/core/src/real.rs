//! Fixed-precision binary floating point for the plane-union maps.

use std::str::FromStr;

use dashu_base::BitTest;
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::ops::UnsignedAbs;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::scalar::Rational;

pub type Real = FBig<HalfEven, 2>;
pub type ComplexReal = num_complex::Complex<Real>;

/// Working precision: `digits` decimal digits carried in `bits` binary digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub digits: u32,
    pub bits: usize,
}

impl Precision {
    pub fn digits(digits: u32) -> Self {
        let bits = (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as usize;
        Precision { digits, bits }
    }

    fn fix(&self, x: Real) -> Real {
        x.with_precision(self.bits).value()
    }

    fn big(&self, n: &BigInt) -> Real {
        // Both libraries print and parse plain decimal integers.
        let i = IBig::from_str(&n.to_string()).expect("decimal integer");
        Real::from(i)
    }

    pub fn rational(&self, q: &Rational) -> Real {
        self.fix(self.big(q.numer())) / self.fix(self.big(q.denom()))
    }

    pub fn int(&self, n: i64) -> Real {
        self.fix(Real::from(IBig::from(n)))
    }

    /// Exact conversion of a finite `f64`, then rounded to this precision.
    pub fn f64(&self, x: f64) -> Real {
        let r = Real::try_from(x).expect("finite f64");
        self.fix(r)
    }

    pub fn zero(&self) -> Real {
        self.int(0)
    }

    pub fn complex(&self, re: Real, im: Real) -> ComplexReal {
        ComplexReal::new(re, im)
    }

    pub fn i(&self) -> ComplexReal {
        ComplexReal::new(self.zero(), self.int(1))
    }
}

pub fn sqrt(x: &Real) -> Real {
    if x.is_zero() {
        return x.clone();
    }
    x.sqrt()
}

pub fn cabs(z: &ComplexReal) -> Real {
    sqrt(&z.norm_sqr())
}

pub fn to_f64(x: &Real) -> f64 {
    x.to_f64().value()
}

/// `log₁₀|x|` without underflow; `−∞` for zero.
pub fn log10_abs(x: &Real) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let repr = x.repr();
    let bits = repr.significand().clone().unsigned_abs();
    // Keep the top 60 bits of the significand for the mantissa.
    let len = bits.bit_len();
    let shift = len.saturating_sub(60);
    let top = Real::from(bits >> shift).to_f64().value();
    (top.log2() + shift as f64 + repr.exponent() as f64) * std::f64::consts::LOG10_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn rational_round_trip() {
        let p = Precision::digits(50);
        let third = p.rational(&rat(1, 3));
        let err = &(&third * &p.int(3)) - &p.int(1);
        assert!(log10_abs(&err) < -49.0);
        assert_eq!(to_f64(&p.rational(&rat(-7, 4))), -1.75);
    }

    #[test]
    fn sqrt_two_to_precision() {
        for d in [30, 60, 120] {
            let p = Precision::digits(d);
            let s = sqrt(&p.int(2));
            let err = &(&s * &s) - &p.int(2);
            assert!(log10_abs(&err) < -(f64::from(d) - 1.0), "digits {d}");
        }
    }

    #[test]
    fn log10_matches_f64() {
        let p = Precision::digits(40);
        for x in [1e-30, 3.5, 1e12, -2.5e-100] {
            assert!((log10_abs(&p.f64(x)) - x.abs().log10()).abs() < 1e-9);
        }
        assert_eq!(log10_abs(&p.zero()), f64::NEG_INFINITY);
    }
}
