//! Levi form of functions written in the nonholomorphic model coordinates.
//!
//! For the quadric `Re w = ½α|z|² + ¼(z² + z̄²)` the coordinates are
//! `x = Re z`, `y = Im z`, `u = Re w − ½α|z|² − ¼(z² + z̄²)`, `v = Im w`, and
//! the operators `4∂²/∂z∂z̄`, `4∂²/∂w∂w̄`, `4∂²/∂z∂w̄` become explicit
//! second-order operators in `(x, y, u, v)`. All entries here carry that factor 4.

use num_complex::Complex64;
use thiserror::Error;

use crate::poly::{ComplexPoly, Monomial, Poly, Var};
use crate::scalar::{Coeff, Rational};

fn times_x<T: Coeff>(p: &Poly<T>, c: &T) -> Poly<T> {
    p.mul_term(c, &Monomial::new(1, 0, 0, 0))
}

fn times_y<T: Coeff>(p: &Poly<T>, c: &T) -> Poly<T> {
    p.mul_term(c, &Monomial::new(0, 1, 0, 0))
}

/// `4∂²f/∂z∂z̄` =
/// `f_xx + f_yy − 2((α+1)x f_xu + (α−1)y f_yu + α f_u) + ((α+1)²x² + (α−1)²y²) f_uu`.
pub fn levi_zz<T: Coeff>(f: &Poly<T>, alpha: &T) -> Poly<T> {
    let one = T::one();
    let two = one.clone() + one.clone();
    let ap = alpha.clone() + one.clone();
    let am = alpha.clone() - one;
    let fu = f.diff(Var::U);
    let fuu = fu.diff(Var::U);
    let fxu = fu.diff(Var::X);
    let fyu = fu.diff(Var::Y);

    let mut out = &f.diff(Var::X).diff(Var::X) + &f.diff(Var::Y).diff(Var::Y);
    out = &out - &times_x(&fxu, &(two.clone() * ap.clone()));
    out = &out - &times_y(&fyu, &(two.clone() * am.clone()));
    out = &out - &fu.scale(&(two * alpha.clone()));
    out = &out + &fuu.mul_term(&(ap.clone() * ap), &Monomial::new(2, 0, 0, 0));
    &out + &fuu.mul_term(&(am.clone() * am), &Monomial::new(0, 2, 0, 0))
}

/// `4∂²f/∂w∂w̄ = f_uu + f_vv`.
pub fn levi_ww<T: Coeff>(f: &Poly<T>) -> Poly<T> {
    &f.diff(Var::U).diff(Var::U) + &f.diff(Var::V).diff(Var::V)
}

/// `4∂²f/∂z∂w̄`, real part `f_xu + f_yv − (α+1)x f_uu − (α−1)y f_uv` and
/// imaginary part `f_xv − f_yu + (α−1)y f_uu − (α+1)x f_uv`.
pub fn levi_zw<T: Coeff>(f: &Poly<T>, alpha: &T) -> ComplexPoly<T> {
    let one = T::one();
    let ap = alpha.clone() + one.clone();
    let am = alpha.clone() - one;
    let fu = f.diff(Var::U);
    let fv = f.diff(Var::V);
    let fuu = fu.diff(Var::U);
    let fuv = fu.diff(Var::V);

    let re = &(&fu.diff(Var::X) + &fv.diff(Var::Y)) - &times_x(&fuu, &ap);
    let re = &re - &times_y(&fuv, &am);
    let im = &(&fv.diff(Var::X) - &fu.diff(Var::Y)) + &times_y(&fuu, &am);
    let im = &im - &times_x(&fuv, &ap);
    ComplexPoly::new(re, im)
}

/// The three 4-scaled Levi entries of a function at parameter `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeviMatrix<T> {
    pub zz: Poly<T>,
    pub ww: Poly<T>,
    pub zw: ComplexPoly<T>,
    pub alpha: T,
}

impl<T: Coeff> LeviMatrix<T> {
    /// `zz·ww − |zw|²`, sixteen times the Levi determinant.
    pub fn det16(&self) -> Poly<T> {
        &(&self.zz * &self.ww) - &self.zw.norm_sqr()
    }
}

pub fn levi_matrix<T: Coeff>(f: &Poly<T>, alpha: &T) -> LeviMatrix<T> {
    LeviMatrix {
        zz: levi_zz(f, alpha),
        ww: levi_ww(f),
        zw: levi_zw(f, alpha),
        alpha: alpha.clone(),
    }
}

pub fn levi_det<T: Coeff>(l: &LeviMatrix<T>) -> Poly<T> {
    l.det16()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeviError {
    #[error("perturbation term {0} involves u or v")]
    PerturbationNotPlanar(Monomial),
    #[error("perturbation term {0} has total degree below 4")]
    PerturbationTooLow(Monomial),
    #[error("finite-difference step {0} must be positive and finite")]
    InvalidStep(f64),
    #[error("finite-difference step {h} underflows at coordinate {coordinate} = {value}")]
    StepUnderflow {
        h: f64,
        coordinate: usize,
        value: f64,
    },
}

/// A real polynomial `τ(x, y)` vanishing to order at least 4 at the origin,
/// modelling the flat remainder in `Re w = ½α|z|² + ¼(z² + z̄²) + τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatPerturbation {
    tau: Poly<Rational>,
}

impl FlatPerturbation {
    pub fn new(tau: Poly<Rational>) -> Result<Self, LeviError> {
        for (m, _) in tau.iter() {
            if m.exp(Var::U) > 0 || m.exp(Var::V) > 0 {
                return Err(LeviError::PerturbationNotPlanar(*m));
            }
            if m.total_degree() < 4 {
                return Err(LeviError::PerturbationTooLow(*m));
            }
        }
        Ok(FlatPerturbation { tau })
    }

    pub fn tau(&self) -> &Poly<Rational> {
        &self.tau
    }
}

/// Model coordinates `(x, y, u, v)` of the holomorphic point
/// `(Re z, Im z, Re w, Im w)`.
pub fn model_coords(alpha: f64, tau: Option<&Poly<f64>>, p: &[f64; 4]) -> [f64; 4] {
    let [a, b, c, d] = *p;
    let g = 0.5 * alpha * (a * a + b * b) + 0.5 * (a * a - b * b);
    let t = tau.map_or(0.0, |t| t.eval(&[a, b, 0.0, 0.0]));
    [a, b, c - g - t, d]
}

/// Finite-difference Levi entries, 4-scaled like [`LeviMatrix`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericLevi {
    pub zz: f64,
    pub ww: f64,
    pub zw: Complex64,
}

impl NumericLevi {
    pub fn det16(&self) -> f64 {
        self.zz * self.ww - self.zw.norm_sqr()
    }

    /// The Levi form itself, `[[f_zz̄, f_zw̄], [f_wz̄, f_ww̄]]`.
    pub fn levi_form(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.zz / 4.0, 0.0), self.zw / 4.0],
            [self.zw.conj() / 4.0, Complex64::new(self.ww / 4.0, 0.0)],
        ]
    }
}

/// Central-difference Levi entries of an arbitrary real field `F(Re z, Im z, Re w, Im w)`.
pub fn numeric_levi_field(
    field: impl Fn(&[f64; 4]) -> f64,
    point: &[f64; 4],
    h: f64,
) -> Result<NumericLevi, LeviError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(LeviError::InvalidStep(h));
    }
    for (k, &value) in point.iter().enumerate() {
        if value + h == value || value - h == value {
            return Err(LeviError::StepUnderflow {
                h,
                coordinate: k,
                value,
            });
        }
    }
    let at = |da: [f64; 4]| {
        let mut q = *point;
        for k in 0..4 {
            q[k] += da[k] * h;
        }
        field(&q)
    };
    let unit = |k: usize, s: f64| {
        let mut e = [0.0; 4];
        e[k] = s;
        e
    };
    let f0 = field(point);
    let second = |i: usize| (at(unit(i, 1.0)) - 2.0 * f0 + at(unit(i, -1.0))) / (h * h);
    let mixed = |i: usize, j: usize| {
        let mut pp = [0.0; 4];
        pp[i] = 1.0;
        pp[j] = 1.0;
        let mut pm = pp;
        pm[j] = -1.0;
        let mut mp = pp;
        mp[i] = -1.0;
        let mut mm = mp;
        mm[j] = -1.0;
        (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h)
    };
    let (faa, fbb, fcc, fdd) = (second(0), second(1), second(2), second(3));
    let (fac, fbd, fad, fbc) = (mixed(0, 2), mixed(1, 3), mixed(0, 3), mixed(1, 2));
    Ok(NumericLevi {
        zz: faa + fbb,
        ww: fcc + fdd,
        zw: Complex64::new(fac + fbd, fad - fbc),
    })
}

/// Numeric Levi entries of `f ∘ coords` at a holomorphic point, where `f` is
/// written in model coordinates for parameter `alpha` and optional flat `tau`.
pub fn numeric_levi(
    f: &Poly<f64>,
    alpha: f64,
    tau: Option<&FlatPerturbation>,
    point: &[f64; 4],
    h: f64,
) -> Result<NumericLevi, LeviError> {
    let tau = tau.map(|t| t.tau().to_f64());
    numeric_levi_field(
        |p| f.eval(&model_coords(alpha, tau.as_ref(), p)),
        point,
        h,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    type P = Poly<Rational>;

    fn m(c: Rational, i: u32, j: u32, k: u32, l: u32) -> P {
        P::mono(c, i, j, k, l)
    }

    fn rho() -> P {
        &(&m(rat(1, 2), 0, 0, 0, 2) + &m(int(1), 2, 0, 0, 2)) + &m(int(1), 0, 2, 0, 2)
    }

    #[test]
    fn zz_of_v_term() {
        let f = &(&m(int(1), 0, 0, 0, 2) + &m(int(1), 2, 0, 0, 2)) + &m(int(1), 0, 2, 0, 2);
        assert_eq!(levi_zz(&f, &rat(1, 3)), m(int(4), 0, 0, 0, 2));
        assert!(levi_zz(&P::one(), &rat(1, 3)).is_zero());
    }

    #[test]
    fn zz_of_y4u2() {
        let a = rat(2, 7);
        let one = int(1);
        let got = levi_zz(&m(one.clone(), 0, 4, 2, 0), &a);
        let expect = P::from_terms([
            (int(12), Monomial::new(0, 2, 2, 0)),
            (int(-4) * (int(5) * a.clone() - int(4)), Monomial::new(0, 4, 1, 0)),
            (int(2) * (a.clone() - &one) * (a.clone() - &one), Monomial::new(0, 6, 0, 0)),
            (int(2) * (a.clone() + &one) * (a.clone() + &one), Monomial::new(2, 4, 0, 0)),
        ]);
        assert_eq!(got, expect);
    }

    #[test]
    fn ww_examples() {
        assert_eq!(levi_ww(&rho()), &(&P::one() + &m(int(2), 2, 0, 0, 0)) + &m(int(2), 0, 2, 0, 0));
        let f = &m(int(1), 0, 0, 2, 0) + &m(int(1), 0, 0, 0, 2);
        assert_eq!(levi_ww(&f), P::constant(int(4)));
        assert!(levi_ww(&m(int(1), 6, 2, 0, 0)).is_zero());
    }

    #[test]
    fn zw_examples() {
        let zw = levi_zw(&rho(), &rat(1, 5));
        assert_eq!(zw.re, m(int(4), 0, 1, 0, 1));
        assert_eq!(zw.im, m(int(4), 1, 0, 0, 1));
        assert!(levi_zw(&m(int(3), 4, 2, 0, 0), &rat(1, 5)).is_zero());
        let a = rat(1, 5);
        let zw = levi_zw(&m(int(1), 0, 0, 2, 0), &a);
        assert_eq!(zw.re, m(int(-2) * (a.clone() + int(1)), 1, 0, 0, 0));
        assert_eq!(zw.im, m(int(2) * (a - int(1)), 0, 1, 0, 0));
    }

    #[test]
    fn rho_determinant() {
        let det = levi_matrix(&rho(), &rat(3, 10)).det16();
        let expect = &(&m(int(4), 0, 0, 0, 2) - &m(int(8), 2, 0, 0, 2)) - &m(int(8), 0, 2, 0, 2);
        assert_eq!(det, expect);
        assert!(levi_matrix(&P::zero(), &int(0)).det16().is_zero());
    }

    #[test]
    fn holomorphic_squares_give_identity() {
        let field = |p: &[f64; 4]| p.iter().map(|t| t * t).sum::<f64>();
        let l = numeric_levi_field(field, &[0.3, -0.2, 0.1, 0.4], 1e-3).unwrap();
        let form = l.levi_form();
        assert!((form[0][0].re - 1.0).abs() < 1e-8);
        assert!((form[1][1].re - 1.0).abs() < 1e-8);
        assert!(form[0][1].norm() < 1e-8);
    }

    #[test]
    fn flat_perturbation_vanishes_at_origin() {
        // f = u, so the Levi form only sees the defining function, including τ.
        let tau = FlatPerturbation::new(m(int(1), 4, 0, 0, 0)).unwrap();
        let f = Poly::<f64>::mono(1.0, 0, 0, 1, 0);
        let with = numeric_levi(&f, 0.25, Some(&tau), &[1e-3, 1e-3, 0.0, 0.0], 1e-4).unwrap();
        let without = numeric_levi(&f, 0.25, None, &[1e-3, 1e-3, 0.0, 0.0], 1e-4).unwrap();
        assert!((with.zz - without.zz).abs() < 1e-4);
        assert!(FlatPerturbation::new(m(int(1), 2, 0, 0, 0)).is_err());
        assert!(FlatPerturbation::new(m(int(1), 4, 0, 1, 0)).is_err());
    }

    #[test]
    fn step_validation() {
        let f = Poly::<f64>::one();
        assert!(matches!(
            numeric_levi(&f, 0.0, None, &[0.0; 4], 0.0),
            Err(LeviError::InvalidStep(_))
        ));
        assert!(matches!(
            numeric_levi(&f, 0.0, None, &[1e20, 0.0, 0.0, 0.0], 1e-3),
            Err(LeviError::StepUnderflow { coordinate: 0, .. })
        ));
    }
}
