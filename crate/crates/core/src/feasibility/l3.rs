//! Slab family for `½ < α < 1`:
//! `Φ = P + y^{2m}u² + x^{2k}u² + M(x²+y²)u^{2n} + (1+x²+y²)v²` with
//! `P = u^{2n} + (ax² + cy²)u^{2n−1} + (Ax⁴ + Bx²y² + Cy⁴)u^{2n−2}`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{
    check_m, halve_until, m_part, phi_accept, select_m, slab_condition, v_part, Accept, ConstraintCheck,
    FeasibilityError, Relation, SEARCH_BUDGET,
};
use crate::poly::{Monomial, Poly};
use crate::scalar::{format_rational, int, serde_rational, Rational};

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffSolutionL3 {
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub c: Rational,
    #[serde(with = "serde_rational")]
    pub A: Rational,
    #[serde(with = "serde_rational")]
    pub B: Rational,
    #[serde(with = "serde_rational")]
    pub C: Rational,
    #[serde(with = "serde_rational")]
    pub M: Rational,
    pub m: u32,
    pub n: u32,
    pub k: u32,
    pub phi: Poly<Rational>,
}

/// Smallest `n` with `2n > m + 2` and smallest `k` with `k + 2 > 2n`.
pub fn slab_degrees(m: u32) -> (u32, u32) {
    let n = (m + 2) / 2 + 1;
    (n, 2 * n - 1)
}

impl CoeffSolutionL3 {
    /// `c = 2nα − a`, `A` and `B` from equalities 4 and 5.
    #[allow(non_snake_case, clippy::too_many_arguments)]
    pub fn assemble(alpha: &Rational, m: u32, n: u32, k: u32, a: &Rational, C: &Rational, M: &Rational) -> Self {
        let nn = int(i64::from(n));
        let odd = &nn * int(2) - int(1);
        let ap1 = (alpha + int(1)) * (alpha + int(1));
        let am1 = (alpha - int(1)) * (alpha - int(1));
        let c = &nn * int(2) * alpha - a;
        let A = &odd * a * &ap1 / ((alpha * int(5) + int(4)) * int(2));
        let B = &odd * (a * &am1 + &c * &ap1) / (alpha * int(10));
        let mut s = CoeffSolutionL3 {
            alpha: alpha.clone(),
            a: a.clone(),
            c,
            A,
            B,
            C: C.clone(),
            M: M.clone(),
            m,
            n,
            k,
            phi: Poly::zero(),
        };
        s.phi = s.build_phi();
        s
    }

    pub fn p(&self) -> Poly<Rational> {
        let e = 2 * self.n;
        Poly::from_terms([
            (Rational::one(), Monomial::new(0, 0, e, 0)),
            (self.a.clone(), Monomial::new(2, 0, e - 1, 0)),
            (self.c.clone(), Monomial::new(0, 2, e - 1, 0)),
            (self.A.clone(), Monomial::new(4, 0, e - 2, 0)),
            (self.B.clone(), Monomial::new(2, 2, e - 2, 0)),
            (self.C.clone(), Monomial::new(0, 4, e - 2, 0)),
        ])
    }

    fn build_phi(&self) -> Poly<Rational> {
        let slabs = Poly::from_terms([
            (Rational::one(), Monomial::new(0, 2 * self.m, 2, 0)),
            (Rational::one(), Monomial::new(2 * self.k, 0, 2, 0)),
        ]);
        &(&(&self.p() + &slabs) + &m_part(&self.M, 2 * self.n)) + &v_part()
    }

    pub fn coefficients(&self) -> BTreeMap<&'static str, Rational> {
        BTreeMap::from([
            ("A", self.A.clone()),
            ("B", self.B.clone()),
            ("C", self.C.clone()),
            ("M", self.M.clone()),
            ("a", self.a.clone()),
            ("c", self.c.clone()),
        ])
    }

    pub fn integers(&self) -> BTreeMap<&'static str, u32> {
        BTreeMap::from([("k", self.k), ("m", self.m), ("n", self.n)])
    }

    /// `12C + 2B + 2n(2n−1)(α−1)² − 2(2n−1)c(3α−2)`, the `y²u^{2n−2}` row.
    pub fn y_row(&self) -> Rational {
        let nn = int(i64::from(self.n));
        let odd = &nn * int(2) - int(1);
        let al = &self.alpha;
        &self.C * int(12) + &self.B * int(2) + &nn * int(2) * &odd * (al - int(1)) * (al - int(1))
            - &odd * int(2) * &self.c * (al * int(3) - int(2))
    }

    pub fn constraints(&self) -> Vec<ConstraintCheck> {
        let al = &self.alpha;
        let nn = int(i64::from(self.n));
        let odd = &nn * int(2) - int(1);
        let ap1 = (al + int(1)) * (al + int(1));
        let am1 = (al - int(1)) * (al - int(1));
        let slab = slab_condition(al, self.m);
        vec![
            ConstraintCheck::new(
                "slab: ((2m+1)α-2m)^2 < m(2m-1)(α-1)^2",
                if slab { Relation::Eq } else { Relation::Lt },
                int(i64::from(slab)),
                int(1),
            ),
            ConstraintCheck::new("2n > m+2", Relation::Gt, &nn * int(2), int(i64::from(self.m) + 2)),
            ConstraintCheck::new("k+2 > 2n", Relation::Gt, int(i64::from(self.k) + 2), &nn * int(2)),
            ConstraintCheck::new("eq3: a + c = 2nα", Relation::Eq, &self.a + &self.c, &nn * int(2) * al),
            ConstraintCheck::new(
                "eq4: (2n-1)a(α+1)^2 = 2(5α+4)A",
                Relation::Eq,
                &odd * &self.a * &ap1,
                (al * int(5) + int(4)) * int(2) * &self.A,
            ),
            ConstraintCheck::new(
                "eq5: (2n-1)(a(α-1)^2 + c(α+1)^2) = 10αB",
                Relation::Eq,
                &odd * (&self.a * &am1 + &self.c * &ap1),
                al * int(10) * &self.B,
            ),
            ConstraintCheck::new("ineq1: B > 0", Relation::Gt, self.B.clone(), Rational::zero()),
            ConstraintCheck::new(
                "ineq2: 8(2n-2)nA > (2n-1)^2 a^2",
                Relation::Gt,
                (&nn * int(2) - int(2)) * int(8) * &nn * &self.A,
                &odd * &odd * &self.a * &self.a,
            ),
            ConstraintCheck::new(
                "ineq6: 12A + 2B + 2n(2n-1)(α+1)^2 > 2(2n-1)a(3α+2)",
                Relation::Gt,
                &self.A * int(12) + &self.B * int(2) + &nn * int(2) * &odd * &ap1,
                &odd * int(2) * &self.a * (al * int(3) + int(2)),
            ),
            ConstraintCheck::new("y^2 row > 0", Relation::Gt, self.y_row(), Rational::zero()),
            ConstraintCheck::new("a > 0", Relation::Gt, self.a.clone(), Rational::zero()),
            ConstraintCheck::new("C > 0", Relation::Gt, self.C.clone(), Rational::zero()),
            ConstraintCheck::new("M > 0", Relation::Gt, self.M.clone(), Rational::zero()),
        ]
    }
}

#[allow(non_snake_case)]
pub fn solve_l3(alpha: &Rational, M: &Rational) -> Result<CoeffSolutionL3, FeasibilityError> {
    let accept = phi_accept(alpha);
    solve_l3_with(alpha, M, &accept)
}

/// Halves `a` from 1 until inequalities 1, 2 and 6 hold, then doubles `C` from
/// 1 until the `y²` row is positive and `accept` passes.
#[allow(non_snake_case)]
pub fn solve_l3_with(alpha: &Rational, M: &Rational, accept: Accept<'_>) -> Result<CoeffSolutionL3, FeasibilityError> {
    let m = select_m(alpha)?.m;
    check_m(M)?;
    let (n, k) = slab_degrees(m);
    let pick_a = |a: &Rational| {
        let s = CoeffSolutionL3::assemble(alpha, m, n, k, a, &int(1), M);
        s.constraints()
            .iter()
            .filter(|c| c.label.starts_with("ineq"))
            .all(|c| c.holds)
            .then(|| a.clone())
    };
    let a = halve_until(int(1), alpha, "a", pick_a)?;
    let mut C = Rational::one();
    for _ in 0..SEARCH_BUDGET {
        let s = CoeffSolutionL3::assemble(alpha, m, n, k, &a, &C, M);
        if s.y_row().is_positive() && accept(&s.phi) {
            return Ok(s);
        }
        C *= int(2);
    }
    Err(FeasibilityError::Budget {
        alpha: format_rational(alpha),
        what: "C",
        tries: SEARCH_BUDGET,
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
    fn degrees_for_examples() {
        let s = solve_l3_with(&rat(3, 4), &int(1), &always).unwrap();
        assert_eq!((s.m, s.n, s.k), (2, 3, 5));
        assert_eq!(&s.a + &s.c, rat(9, 2));
        let s = solve_l3_with(&rat(51, 100), &int(1), &always).unwrap();
        assert_eq!((s.m, s.n, s.k), (1, 2, 3));
        let s = solve_l3_with(&rat(99, 100), &int(1), &always).unwrap();
        assert_eq!(s.n, s.m / 2 + 2);
    }

    #[test]
    fn vanishing_rows() {
        for (p, q) in [(51, 100), (3, 5), (3, 4), (9, 10)] {
            let al = rat(p, q);
            let s = solve_l3_with(&al, &int(1), &always).unwrap();
            let z = levi_zz(&s.p(), &al);
            let e = 2 * s.n;
            for mono in [
                Monomial::new(0, 0, e - 1, 0),
                Monomial::new(4, 0, e - 3, 0),
                Monomial::new(2, 2, e - 3, 0),
            ] {
                assert!(z.coeff(&mono).is_zero(), "alpha {al}: {mono}");
            }
            assert!(s.constraints().iter().all(|c| c.holds), "alpha {al}");
        }
    }

    #[test]
    fn rejects_outside_slab_range() {
        assert!(solve_l3_with(&rat(1, 2), &int(1), &always).is_err());
        assert!(solve_l3_with(&int(1), &int(1), &always).is_err());
    }

    #[test]
    fn phi_zero_set() {
        let s = solve_l3_with(&rat(3, 4), &int(1), &always).unwrap();
        let on_s = |p: &Poly<Rational>| p.drop_var(Var::U).drop_var(Var::V);
        assert!(on_s(&s.phi).is_zero());
        for v in Var::ALL {
            assert!(on_s(&s.phi.diff(v)).is_zero());
        }
    }
}
