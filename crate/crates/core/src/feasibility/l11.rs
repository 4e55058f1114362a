//! Degree-4 family: `P = u⁴ + ax²u³ + (Ax⁴ + Bx²y²)u²`, obtained by the same
//! vanish-odd-rows procedure as the degree-6 family. The coefficients are
//! derived here; none are stated in closed form elsewhere.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{check_m, halve_until, m_part, phi_accept, v_part, Accept, ConstraintCheck, FeasibilityError, Family, Relation};
use crate::poly::{Monomial, Poly};
use crate::scalar::{format_rational, int, serde_rational, Rational};

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffSolutionL11 {
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub A: Rational,
    #[serde(with = "serde_rational")]
    pub B: Rational,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    #[serde(with = "serde_rational")]
    pub M: Rational,
    pub phi: Poly<Rational>,
}

impl CoeffSolutionL11 {
    /// `a = 4α` clears the `u³` row; `A = 6α(α+1)²/(5α+4)` and
    /// `B = 6(α−1)²/5` clear the `u` row.
    #[allow(non_snake_case)]
    pub fn assemble(alpha: &Rational, eps: &Rational, M: &Rational) -> Self {
        let ap1 = (alpha + int(1)) * (alpha + int(1));
        let am1 = (alpha - int(1)) * (alpha - int(1));
        let mut s = CoeffSolutionL11 {
            alpha: alpha.clone(),
            a: alpha * int(4),
            A: alpha * int(6) * ap1 / (alpha * int(5) + int(4)),
            B: am1 * int(6) / int(5),
            eps: eps.clone(),
            M: M.clone(),
            phi: Poly::zero(),
        };
        s.phi = s.build_phi();
        s
    }

    pub fn p(&self) -> Poly<Rational> {
        Poly::from_terms([
            (Rational::one(), Monomial::new(0, 0, 4, 0)),
            (self.a.clone(), Monomial::new(2, 0, 3, 0)),
            (self.A.clone(), Monomial::new(4, 0, 2, 0)),
            (self.B.clone(), Monomial::new(2, 2, 2, 0)),
        ])
    }

    fn build_phi(&self) -> Poly<Rational> {
        let perturb = Poly::from_terms([
            (self.eps.clone(), Monomial::new(4, 0, 2, 0)),
            (self.eps.clone(), Monomial::new(0, 4, 2, 0)),
        ]);
        &(&(&self.p() + &perturb) + &m_part(&self.M, 4)) + &v_part()
    }

    pub fn coefficients(&self) -> BTreeMap<&'static str, Rational> {
        BTreeMap::from([
            ("A", self.A.clone()),
            ("B", self.B.clone()),
            ("M", self.M.clone()),
            ("a", self.a.clone()),
            ("eps", self.eps.clone()),
        ])
    }

    pub fn constraints(&self) -> Vec<ConstraintCheck> {
        let al = &self.alpha;
        let ap1 = (al + int(1)) * (al + int(1));
        let am1 = (al - int(1)) * (al - int(1));
        let a2 = &self.a * &self.a;
        let a_eps = &self.A + &self.eps;
        vec![
            ConstraintCheck::new("u^3 row: a = 4α", Relation::Eq, self.a.clone(), al * int(4)),
            ConstraintCheck::new(
                "u row x^4: 2(5α+4)A = 3a(α+1)^2",
                Relation::Eq,
                (al * int(5) + int(4)) * int(2) * &self.A,
                &self.a * int(3) * &ap1,
            ),
            ConstraintCheck::new(
                "u row x^2y^2: 10αB = 3a(α-1)^2",
                Relation::Eq,
                al * int(10) * &self.B,
                &self.a * int(3) * &am1,
            ),
            ConstraintCheck::new("P > 0: a^2 < 4(A+eps)", Relation::Lt, a2.clone(), &a_eps * int(4)),
            ConstraintCheck::new("radial: 9a^2 < 32(A+eps)", Relation::Lt, &a2 * int(9), &a_eps * int(32)),
            ConstraintCheck::new(
                "u^2 row x^2: 12A + 2B + 12 > 60α^2 + 24α",
                Relation::Gt,
                &self.A * int(12) + &self.B * int(2) + int(12),
                al * al * int(60) + al * int(24),
            ),
            ConstraintCheck::new("B > 0", Relation::Gt, self.B.clone(), Rational::zero()),
            ConstraintCheck::new("eps > 0", Relation::Gt, self.eps.clone(), Rational::zero()),
            ConstraintCheck::new("M > 0", Relation::Gt, self.M.clone(), Rational::zero()),
        ]
    }
}

#[allow(non_snake_case)]
pub fn solve_l11(alpha: &Rational, M: &Rational) -> Result<CoeffSolutionL11, FeasibilityError> {
    let accept = phi_accept(alpha);
    solve_l11_with(alpha, M, &accept)
}

/// Solves the degree-4 system; any `α ∈ [0, 1)` is accepted as input and
/// violations are reported, since the family is only claimed up to 11/25.
#[allow(non_snake_case)]
pub fn solve_l11_with(alpha: &Rational, M: &Rational, accept: Accept<'_>) -> Result<CoeffSolutionL11, FeasibilityError> {
    if alpha.is_negative() || *alpha >= int(1) {
        return Err(FeasibilityError::AlphaOutOfRange {
            alpha: format_rational(alpha),
            family: Family::L11,
            range: "0 <= alpha < 1",
        });
    }
    check_m(M)?;
    let probe = CoeffSolutionL11::assemble(alpha, &Rational::zero(), M);
    if let Some(bad) = probe
        .constraints()
        .into_iter()
        .find(|k| !k.holds && !k.label.starts_with("eps") && !k.label.contains("A+eps"))
    {
        return Err(FeasibilityError::Infeasible {
            alpha: format_rational(alpha),
            constraint: bad.to_string(),
        });
    }
    let scale = if probe.A.is_positive() { probe.A.clone().min(probe.B.clone()) } else { probe.B.clone() };
    halve_until(scale / int(1000), alpha, "eps", |eps| {
        let s = CoeffSolutionL11::assemble(alpha, eps, M);
        (s.constraints().iter().all(|k| k.holds) && accept(&s.phi)).then_some(s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levi::levi_zz;
    use crate::poly::Var;
    use crate::scalar::rat;

    fn always(_: &Poly<Rational>) -> bool {
        true
    }

    #[test]
    fn odd_u_rows_vanish() {
        for k in 0..=11 {
            let a = rat(k, 25);
            let s = CoeffSolutionL11::assemble(&a, &int(0), &int(1));
            let z = levi_zz(&s.p(), &a);
            for e in [3, 1] {
                assert!(z.iter().all(|(m, _)| m.exp(Var::U) != e), "alpha {a}, u^{e}");
            }
        }
    }

    #[test]
    fn ledger_through_boundary() {
        for k in 0..=11 {
            let s = solve_l11_with(&rat(k, 25), &int(1), &always).unwrap();
            assert!(s.constraints().iter().all(|c| c.holds));
        }
    }

    #[test]
    fn infeasible_past_range() {
        match solve_l11_with(&rat(3, 5), &int(1), &always) {
            Err(FeasibilityError::Infeasible { constraint, .. }) => assert!(constraint.contains("u^2 row")),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
