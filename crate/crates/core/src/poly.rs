//! Sparse polynomials in the four real model coordinates `(x, y, u, v)`.
//!
//! Monomials carry the weighted grading `x, y ↦ 1`, `u, v ↦ 2`. The term map is
//! ordered by weighted degree first, so slices and serialization are
//! deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{format_rational, parse_rational, rational_to_f64, Coeff, Rational};

/// One of the four real coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
    U,
    V,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::U, Var::V];

    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::U => 2,
            Var::V => 3,
        }
    }

    /// Weight in the quasi-homogeneous grading.
    pub fn weight(self) -> u32 {
        match self {
            Var::X | Var::Y => 1,
            Var::U | Var::V => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::U => "u",
            Var::V => "v",
        }
    }
}

pub const WEIGHTS: [u32; 4] = [1, 1, 2, 2];

/// Exponent vector `(i, j, k, l)` of `x^i y^j u^k v^l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct Monomial(pub [u32; 4]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; 4]);

    pub fn new(i: u32, j: u32, k: u32, l: u32) -> Self {
        Monomial([i, j, k, l])
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 4];
        e[v.index()] = 1;
        Monomial(e)
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.0[v.index()]
    }

    pub fn weighted_degree(&self) -> u32 {
        self.0.iter().zip(WEIGHTS).map(|(e, w)| e * w).sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0) {
            *a += b;
        }
        Monomial(e)
    }

    /// True when every exponent is even, i.e. the monomial is a square.
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }

    /// `self` divides `other`.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0).all(|(a, b)| *a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weighted_degree()
            .cmp(&other.weighted_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [i, j, k, l] = self.0;
        write!(f, "x^{i}*y^{j}*u^{k}*v^{l}")
    }
}

/// Sparse polynomial with coefficients in `T`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<T> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Coeff> Default for Poly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Coeff> Poly<T> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::term(c, Monomial::ONE)
    }

    pub fn var(v: Var) -> Self {
        Self::term(T::one(), Monomial::var(v))
    }

    pub fn term(c: T, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(c, m);
        p
    }

    /// `c * x^i y^j u^k v^l`.
    pub fn mono(c: T, i: u32, j: u32, k: u32, l: u32) -> Self {
        Self::term(c, Monomial::new(i, j, k, l))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (T, Monomial)>) -> Self {
        let mut p = Self::zero();
        for (c, m) in terms {
            p.add_term(c, m);
        }
        p
    }

    /// Adds `c * m` in place, dropping the entry if it cancels.
    pub fn add_term(&mut self, c: T, m: Monomial) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = old.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending (weighted degree, then graded-lex) order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn max_weighted_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::weighted_degree).max()
    }

    pub fn min_weighted_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::weighted_degree).min()
    }

    pub fn max_exponent(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (*m, a.clone() * c.clone()))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    /// Product with a single term `c * m`.
    pub fn mul_term(&self, c: &T, m: &Monomial) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, a)| (n.mul(m), a.clone() * c.clone()))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative.
    pub fn diff(&self, v: Var) -> Self {
        let idx = v.index();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.0[idx];
            if e == 0 {
                continue;
            }
            let mut n = *m;
            n.0[idx] -= 1;
            out.add_term(c.clone() * T::from_u32(e).expect("exponent fits"), n);
        }
        out
    }

    /// Exact (for exact `T`) evaluation at `(x, y, u, v)`.
    pub fn eval(&self, point: &[T; 4]) -> T {
        let mut powers: [Vec<T>; 4] = Default::default();
        for (k, pw) in powers.iter_mut().enumerate() {
            let top = self.terms.keys().map(|m| m.0[k]).max().unwrap_or(0) as usize;
            pw.reserve(top + 1);
            pw.push(T::one());
            for e in 1..=top {
                let next = pw[e - 1].clone() * point[k].clone();
                pw.push(next);
            }
        }
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..4 {
                let e = m.0[k] as usize;
                if e > 0 {
                    t = t * powers[k][e].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Decomposition into quasi-homogeneous slices, ascending in weighted degree.
    pub fn weighted_parts(&self) -> Vec<(u32, Poly<T>)> {
        let mut out: Vec<(u32, Poly<T>)> = Vec::new();
        for (m, c) in &self.terms {
            let d = m.weighted_degree();
            match out.last_mut() {
                Some((last, p)) if *last == d => {
                    p.terms.insert(*m, c.clone());
                }
                _ => out.push((d, Poly::term(c.clone(), *m))),
            }
        }
        out
    }

    /// Sets `v = 0`.
    pub fn drop_var(&self, v: Var) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.exp(v) == 0)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (f(c), *m)))
    }
}

impl Poly<Rational> {
    pub fn to_f64(&self) -> Poly<f64> {
        self.map(rational_to_f64)
    }

    /// Sum of absolute coefficient values.
    pub fn l1_norm(&self) -> Rational {
        self.terms
            .values()
            .fold(Rational::zero(), |acc, c| acc + num_traits::Signed::abs(c))
    }
}

impl Poly<f64> {
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }
}

impl<T: Coeff> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(c.clone(), *m);
        }
        out
    }
}

impl<T: Coeff> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(-c.clone(), *m);
        }
        out
    }
}

impl<T: Coeff> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = Poly::zero();
        for (m, a) in &self.terms {
            for (n, b) in &rhs.terms {
                out.add_term(a.clone() * b.clone(), m.mul(n));
            }
        }
        out
    }
}

impl<T: Coeff> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<T: Coeff> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $f(self, rhs: Poly<T>) -> Poly<T> {
                (&self).$f(&rhs)
            }
        }
        impl<T: Coeff> $tr<&Poly<T>> for Poly<T> {
            type Output = Poly<T>;
            fn $f(self, rhs: &Poly<T>) -> Poly<T> {
                (&self).$f(rhs)
            }
        }
        impl<T: Coeff> $tr<Poly<T>> for &Poly<T> {
            type Output = Poly<T>;
            fn $f(self, rhs: Poly<T>) -> Poly<T> {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Coeff> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        -&self
    }
}

impl<T: Coeff> Zero for Poly<T> {
    fn zero() -> Self {
        Poly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<T: Coeff> One for Poly<T> {
    fn one() -> Self {
        Poly::one()
    }
}

/// `re + i·im` with real-polynomial parts.
#[derive(Clone, PartialEq, Debug)]
pub struct ComplexPoly<T> {
    pub re: Poly<T>,
    pub im: Poly<T>,
}

impl<T: Coeff> ComplexPoly<T> {
    pub fn new(re: Poly<T>, im: Poly<T>) -> Self {
        ComplexPoly { re, im }
    }

    pub fn zero() -> Self {
        ComplexPoly::new(Poly::zero(), Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ComplexPoly::new(self.re.clone(), -&self.im)
    }

    /// `|p|² = re² + im²`.
    pub fn norm_sqr(&self) -> Poly<T> {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn add(&self, other: &Self) -> Self {
        ComplexPoly::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn mul(&self, other: &Self) -> Self {
        ComplexPoly::new(
            &(&self.re * &other.re) - &(&self.im * &other.im),
            &(&self.re * &other.im) + &(&self.im * &other.re),
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParsePolyError {
    #[error("malformed term `{0}`")]
    Term(String),
    #[error("bad coefficient in `{term}`: {source}")]
    Coefficient {
        term: String,
        source: crate::scalar::ParseRationalError,
    },
}

/// `num/den*x^i*y^j*u^k*v^l` terms joined by ` + `, highest weighted degree first;
/// the zero polynomial prints as `0`.
impl fmt::Display for Poly<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().rev().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", format_rational(c), m)?;
        }
        Ok(())
    }
}

impl FromStr for Poly<Rational> {
    type Err = ParsePolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(Poly::zero());
        }
        let mut p = Poly::zero();
        for term in s.split(" + ") {
            let mut parts = term.trim().split('*');
            let coef = parts
                .next()
                .ok_or_else(|| ParsePolyError::Term(term.to_string()))?;
            let coef = parse_rational(coef).map_err(|source| ParsePolyError::Coefficient {
                term: term.to_string(),
                source,
            })?;
            let mut e = [0u32; 4];
            for factor in parts {
                let (name, exp) = factor
                    .split_once('^')
                    .ok_or_else(|| ParsePolyError::Term(term.to_string()))?;
                let idx = match name {
                    "x" => 0,
                    "y" => 1,
                    "u" => 2,
                    "v" => 3,
                    _ => return Err(ParsePolyError::Term(term.to_string())),
                };
                e[idx] += exp
                    .parse::<u32>()
                    .map_err(|_| ParsePolyError::Term(term.to_string()))?;
            }
            p.add_term(coef, Monomial(e));
        }
        Ok(p)
    }
}

impl serde::Serialize for Poly<Rational> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Poly<Rational> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    type P = Poly<Rational>;

    fn m(c: i64, i: u32, j: u32, k: u32, l: u32) -> P {
        P::mono(int(c), i, j, k, l)
    }

    #[test]
    fn additive_inverse_cancels() {
        assert!((&m(1, 0, 0, 2, 0) + &m(-1, 0, 0, 2, 0)).is_zero());
    }

    #[test]
    fn product_examples() {
        assert_eq!(&m(1, 2, 0, 0, 0) * &m(1, 0, 0, 6, 0), m(1, 2, 0, 6, 0));
        let lhs = &(&m(1, 2, 0, 0, 0) + &m(1, 0, 2, 0, 0)) * &m(1, 0, 0, 0, 2);
        assert_eq!(lhs, &m(1, 2, 0, 0, 2) + &m(1, 0, 2, 0, 2));
        assert_eq!(&m(1, 0, 0, 1, 0) * &m(1, 0, 0, 5, 0), m(1, 0, 0, 6, 0));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(m(1, 0, 4, 2, 0).diff(Var::U), m(2, 0, 4, 1, 0));
        assert_eq!(m(1, 8, 0, 2, 0).diff(Var::X), m(8, 7, 0, 2, 0));
        assert_eq!(m(1, 0, 0, 0, 2).diff(Var::V).diff(Var::V), P::constant(int(2)));
    }

    #[test]
    fn eval_on_zero_set() {
        let p = &m(1, 0, 0, 2, 0) + &m(1, 0, 0, 0, 2);
        assert!(p.eval(&[int(1), int(1), int(0), int(0)]).is_zero());
    }

    #[test]
    fn weighted_slices() {
        let p = &m(1, 0, 0, 6, 0) + &m(1, 2, 0, 5, 0);
        let parts = p.weighted_parts();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, 12);
        assert!(P::zero().weighted_parts().is_empty());
    }

    #[test]
    fn text_round_trip() {
        let p = &(&m(3, 2, 0, 5, 0) + &P::mono(rat(-1, 2), 0, 1, 0, 1)) + &P::constant(rat(7, 3));
        let s = p.to_string();
        assert_eq!(
            s,
            "3/1*x^2*y^0*u^5*v^0 + -1/2*x^0*y^1*u^0*v^1 + 7/3*x^0*y^0*u^0*v^0"
        );
        assert_eq!(s.parse::<P>().unwrap(), p);
        assert_eq!(P::zero().to_string(), "0");
        assert_eq!("0".parse::<P>().unwrap(), P::zero());
    }

    fn small_poly() -> impl Strategy<Value = P> {
        prop::collection::vec(((-5i64..=5), (0u32..3), (0u32..3), (0u32..3), (0u32..3)), 0..6)
            .prop_map(|ts| {
                P::from_terms(
                    ts.into_iter()
                        .map(|(c, i, j, k, l)| (int(c), Monomial::new(i, j, k, l))),
                )
            })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn mixed_partials_commute(a in small_poly()) {
            prop_assert_eq!(a.diff(Var::X).diff(Var::U), a.diff(Var::U).diff(Var::X));
            prop_assert_eq!(a.diff(Var::Y).diff(Var::V), a.diff(Var::V).diff(Var::Y));
        }

        #[test]
        fn slices_reassemble(a in small_poly()) {
            let sum = a.weighted_parts().into_iter().fold(P::zero(), |acc, (d, p)| {
                assert!(p.iter().all(|(m, _)| m.weighted_degree() == d));
                &acc + &p
            });
            prop_assert_eq!(sum, a);
        }

        #[test]
        fn serialization_round_trips(a in small_poly()) {
            prop_assert_eq!(a.to_string().parse::<P>().unwrap(), a);
        }

        #[test]
        fn eval_is_a_ring_map(a in small_poly(), b in small_poly(),
                              pt in prop::array::uniform4(-3i64..=3)) {
            let pt = pt.map(int);
            prop_assert_eq!((&a * &b).eval(&pt), a.eval(&pt) * b.eval(&pt));
            prop_assert_eq!((&a + &b).eval(&pt), a.eval(&pt) + b.eval(&pt));
        }
    }
}
