//! Degree-6 family:
//! `P̃ = u⁶ + ((6α+c)x² − cy²)u⁵ + (Ax⁴ + Bx²y² + A'y⁴)u⁴ + Cx⁴y²u³ + (Dx⁶y² + Ex⁴y⁴)u²`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{
    check_m, halve_until, m_part, phi_accept, v_part, Accept, ConstraintCheck, FeasibilityError, Family, Relation,
};
use crate::certify::{q6, q8};
use crate::poly::{Monomial, Poly};
use crate::scalar::{format_rational, int, rat, serde_rational, Rational};

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffSolutionL1 {
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub c: Rational,
    #[serde(with = "serde_rational")]
    pub A: Rational,
    #[serde(with = "serde_rational")]
    pub Aprime: Rational,
    #[serde(with = "serde_rational")]
    pub B: Rational,
    #[serde(with = "serde_rational")]
    pub C: Rational,
    #[serde(with = "serde_rational")]
    pub D: Rational,
    #[serde(with = "serde_rational")]
    pub E: Rational,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    #[serde(with = "serde_rational")]
    pub M: Rational,
    pub phi: Poly<Rational>,
}

fn sq(q: &Rational) -> Rational {
    q * q
}

/// Equalities 1–4 solved for `A, A', B, D, E` given `α > 0`, `c` and `C`.
#[allow(non_snake_case)]
fn derived(alpha: &Rational, c: &Rational, C: &Rational) -> [Rational; 5] {
    let ap1 = sq(&(alpha + int(1)));
    let am1 = sq(&(alpha - int(1)));
    let f = alpha * int(5) + int(4);
    let A = (C + &(alpha * int(60) * &ap1) + &(c * int(10) * &ap1)) / (&f * int(4));
    let Aprime = c * int(5) * &am1 / ((int(4) - alpha * int(5)) * int(2));
    let B = &am1 * int(3) - c * int(2) + C * int(3) / (alpha * int(10));
    let D = &ap1 * int(3) * C / ((alpha * int(9) + int(4)) * int(2));
    let E = &am1 * C / (alpha * int(6));
    [A, Aprime, B, D, E]
}

impl CoeffSolutionL1 {
    /// Assembles the candidate for explicit `(α, c, C, ε, M)`; `α = 0` uses the
    /// special case `A = C/16, B = 3, D = 3C/8, E = C` and ignores `c`.
    #[allow(non_snake_case)]
    pub fn assemble(alpha: &Rational, c: &Rational, C: &Rational, eps: &Rational, M: &Rational) -> Self {
        let [A, Aprime, B, D, E] = if alpha.is_zero() {
            [C / int(16), Rational::zero(), int(3), C * rat(3, 8), C.clone()]
        } else {
            derived(alpha, c, C)
        };
        let c = if alpha.is_zero() { Rational::zero() } else { c.clone() };
        let mut s = CoeffSolutionL1 {
            alpha: alpha.clone(),
            c,
            A,
            Aprime,
            B,
            C: C.clone(),
            D,
            E,
            eps: eps.clone(),
            M: M.clone(),
            phi: Poly::zero(),
        };
        s.phi = s.build_phi();
        s
    }

    /// `P̃` without the ε-perturbation.
    pub fn p_tilde(&self) -> Poly<Rational> {
        let six_a = &self.alpha * int(6);
        Poly::from_terms([
            (Rational::one(), Monomial::new(0, 0, 6, 0)),
            (&six_a + &self.c, Monomial::new(2, 0, 5, 0)),
            (-self.c.clone(), Monomial::new(0, 2, 5, 0)),
            (self.A.clone(), Monomial::new(4, 0, 4, 0)),
            (self.B.clone(), Monomial::new(2, 2, 4, 0)),
            (self.Aprime.clone(), Monomial::new(0, 4, 4, 0)),
            (self.C.clone(), Monomial::new(4, 2, 3, 0)),
            (self.D.clone(), Monomial::new(6, 2, 2, 0)),
            (self.E.clone(), Monomial::new(4, 4, 2, 0)),
        ])
    }

    fn build_phi(&self) -> Poly<Rational> {
        let perturb = Poly::from_terms([
            (self.eps.clone(), Monomial::new(8, 0, 2, 0)),
            (self.eps.clone(), Monomial::new(0, 8, 2, 0)),
        ]);
        &(&(&self.p_tilde() + &perturb) + &m_part(&self.M, 6)) + &v_part()
    }

    pub fn coefficients(&self) -> BTreeMap<&'static str, Rational> {
        BTreeMap::from([
            ("A", self.A.clone()),
            ("Aprime", self.Aprime.clone()),
            ("B", self.B.clone()),
            ("C", self.C.clone()),
            ("D", self.D.clone()),
            ("E", self.E.clone()),
            ("M", self.M.clone()),
            ("c", self.c.clone()),
            ("eps", self.eps.clone()),
        ])
    }

    /// Exact ledger recomputed from the stored coefficients.
    pub fn constraints(&self) -> Vec<ConstraintCheck> {
        let a = &self.alpha;
        let ap1 = sq(&(a + int(1)));
        let am1 = sq(&(a - int(1)));
        let mut out = Vec::new();
        let zero_alpha = a.is_zero();
        let c0 = self.c.is_zero();

        // Equalities, cleared of denominators.
        out.push(ConstraintCheck::new(
            "eq1: 4(5α+4)A = C + 60α(α+1)^2 + 10c(α+1)^2",
            Relation::Eq,
            (a * int(5) + int(4)) * int(4) * &self.A,
            &self.C + &(a * int(60) * &ap1) + &(&self.c * int(10) * &ap1),
        ));
        if zero_alpha {
            out.push(ConstraintCheck::not_applicable("eq2: 10αB = 30α(α-1)^2 - 20αc + 3C"));
        } else {
            out.push(ConstraintCheck::new(
                "eq2: 10αB = 30α(α-1)^2 - 20αc + 3C",
                Relation::Eq,
                a * int(10) * &self.B,
                a * int(30) * &am1 - a * int(20) * &self.c + &self.C * int(3),
            ));
        }
        out.push(ConstraintCheck::new(
            "eq3: 2(9α+4)D = 3(α+1)^2 C",
            Relation::Eq,
            (a * int(9) + int(4)) * int(2) * &self.D,
            &ap1 * int(3) * &self.C,
        ));
        if zero_alpha {
            out.push(ConstraintCheck::not_applicable("eq4: 6αE = (α-1)^2 C"));
        } else {
            out.push(ConstraintCheck::new(
                "eq4: 6αE = (α-1)^2 C",
                Relation::Eq,
                a * int(6) * &self.E,
                &am1 * &self.C,
            ));
        }
        out.push(ConstraintCheck::new(
            "eq A': 2(4-5α)A' = 5c(α-1)^2",
            Relation::Eq,
            (int(4) - a * int(5)) * int(2) * &self.Aprime,
            &self.c * int(5) * &am1,
        ));

        if c0 {
            out.push(ConstraintCheck::new(
                "ineq5: 15(α+1)^2 + 6A + B > 30α(3α+2)",
                Relation::Gt,
                &ap1 * int(15) + &self.A * int(6) + &self.B,
                a * int(30) * (a * int(3) + int(2)),
            ));
            out.push(ConstraintCheck::new(
                "ineq6: 2A(α-1)^2 + 2B(α+1)^2 + 5D + 2E > C(7α+2)",
                Relation::Gt,
                &self.A * int(2) * &am1 + &self.B * int(2) * &ap1 + &self.D * int(5) + &self.E * int(2),
                &self.C * (a * int(7) + int(2)),
            ));
            out.push(ConstraintCheck::new(
                "ineq7: 75α^2 < 8A",
                Relation::Lt,
                a * a * int(75),
                &self.A * int(8),
            ));
            out.push(ConstraintCheck::new(
                "ineq8: 9C^2 < 32BD",
                Relation::Lt,
                &self.C * &self.C * int(9),
                &self.B * &self.D * int(32),
            ));
        } else {
            for label in ["ineq5", "ineq6", "ineq7", "ineq8"] {
                out.push(ConstraintCheck::not_applicable(format!("{label} (c > 0: certified directly)")));
            }
        }
        for (name, q) in [
            ("A > 0", &self.A),
            ("B > 0", &self.B),
            ("C > 0", &self.C),
            ("D > 0", &self.D),
            ("E > 0", &self.E),
            ("eps > 0", &self.eps),
            ("M > 0", &self.M),
        ] {
            out.push(ConstraintCheck::new(name, Relation::Gt, q.clone(), Rational::zero()));
        }
        if !c0 {
            out.push(ConstraintCheck::new("A' > 0", Relation::Gt, self.Aprime.clone(), Rational::zero()));
        }
        out
    }
}

/// Lower and upper bounds for `C` when `c = 0`, each with the inequality that
/// produced it; `None` means unbounded above.
#[derive(Clone, Debug, PartialEq)]
pub struct CInterval {
    pub lower: Rational,
    pub lower_from: &'static str,
    pub upper: Option<Rational>,
    pub upper_from: &'static str,
}

impl CInterval {
    pub fn is_empty(&self) -> bool {
        self.upper.as_ref().is_some_and(|u| *u <= self.lower)
    }

    /// Midpoint, or 1 (`lower + 1` past 1) when unbounded above.
    pub fn pick(&self) -> Rational {
        match &self.upper {
            Some(u) => (&self.lower + u) / int(2),
            None if self.lower < int(1) => int(1),
            None => &self.lower + int(1),
        }
    }
}

/// Inequalities 5–8 rewritten as linear conditions on `C` (for `α > 0`).
pub fn c_interval(alpha: &Rational) -> CInterval {
    let a = alpha;
    let ap1 = sq(&(a + int(1)));
    let am1 = sq(&(a - int(1)));
    let mut lower = (Rational::zero(), "C > 0");
    // 5: 30α(3α+2)(5α²+2α−2) < (5α+2)C.
    let l5 = a * int(30) * (a * int(3) + int(2)) * (a * a * int(5) + a * int(2) - int(2)) / (a * int(5) + int(2));
    if l5 > lower.0 {
        lower = (l5, "ineq5");
    }
    // 7: 15α(17α²+4α−8) < 2C.
    let l7 = a * int(15) * (a * a * int(17) + a * int(4) - int(8)) / int(2);
    if l7 > lower.0 {
        lower = (l7, "ineq7");
    }
    let mut upper: Option<(Rational, &'static str)> = None;
    let mut tighten = |bound: Rational, from: &'static str| {
        if upper.as_ref().is_none_or(|(u, _)| bound < *u) {
            upper = Some((bound, from));
        }
    };
    // 6: 180α(9α+4)(5α+2)(α−1)²(α+1)² > (7α+2)q₆(α)C.
    let k6 = (a * int(7) + int(2)) * q6().eval(a);
    if k6.is_positive() {
        let rhs = a * int(180) * (a * int(9) + int(4)) * (a * int(5) + int(2)) * &am1 * &ap1;
        tighten(rhs / k6, "ineq6");
    }
    // 8: 80α(α−1)²(α+1)² > q₈(α)C.
    let k8 = q8().eval(a);
    if k8.is_positive() {
        tighten(a * int(80) * &am1 * &ap1 / k8, "ineq8");
    }
    let (upper, upper_from) = match upper {
        Some((u, f)) => (Some(u), f),
        None => (None, "unbounded"),
    };
    CInterval {
        lower: lower.0,
        lower_from: lower.1,
        upper,
        upper_from,
    }
}

/// Degree-6 solution with the default acceptance test (strict Levi conditions
/// by domination).
#[allow(non_snake_case)]
pub fn solve_l1(alpha: &Rational, M: &Rational) -> Result<CoeffSolutionL1, FeasibilityError> {
    let accept = phi_accept(alpha);
    solve_l1_with(alpha, M, &accept)
}

#[allow(non_snake_case)]
pub fn solve_l1_with(alpha: &Rational, M: &Rational, accept: Accept<'_>) -> Result<CoeffSolutionL1, FeasibilityError> {
    if alpha.is_negative() || *alpha > rat(13, 25) {
        return Err(FeasibilityError::AlphaOutOfRange {
            alpha: format_rational(alpha),
            family: Family::L1,
            range: "0 <= alpha <= 13/25",
        });
    }
    check_m(M)?;
    if alpha.is_zero() {
        return finish(alpha, &Rational::zero(), &int(1), M, accept);
    }
    let iv = c_interval(alpha);
    if iv.is_empty() {
        let empty = FeasibilityError::EmptyInterval {
            alpha: format_rational(alpha),
            lower: format_rational(&iv.lower),
            lower_from: iv.lower_from.into(),
            upper: iv.upper.as_ref().map(format_rational).unwrap_or_default(),
            upper_from: iv.upper_from.into(),
        };
        return continuity_fallback(alpha, M, accept).ok_or(empty);
    }
    finish(alpha, &Rational::zero(), &iv.pick(), M, accept)
}

/// Halves ε from `min(A, B, D, E)/1000` until the candidate is accepted.
#[allow(non_snake_case)]
fn finish(
    alpha: &Rational,
    c: &Rational,
    C: &Rational,
    M: &Rational,
    accept: Accept<'_>,
) -> Result<CoeffSolutionL1, FeasibilityError> {
    let probe = CoeffSolutionL1::assemble(alpha, c, C, &Rational::zero(), M);
    if let Some(bad) = probe.constraints().into_iter().find(|k| !k.holds && !k.label.starts_with("eps")) {
        return Err(FeasibilityError::Infeasible {
            alpha: format_rational(alpha),
            constraint: bad.to_string(),
        });
    }
    let start = [&probe.A, &probe.B, &probe.D, &probe.E]
        .into_iter()
        .min()
        .expect("four coefficients")
        / int(1000);
    halve_until(start, alpha, "eps", |eps| {
        let s = CoeffSolutionL1::assemble(alpha, c, C, eps, M);
        accept(&s.phi).then_some(s)
    })
}

/// `c > 0` search used only if the `c = 0` interval is empty.
#[allow(non_snake_case)]
fn continuity_fallback(alpha: &Rational, M: &Rational, accept: Accept<'_>) -> Option<CoeffSolutionL1> {
    for c in [rat(1, 16), rat(1, 8), rat(1, 4), rat(1, 2)] {
        for j in -4i32..=4 {
            let C = if j < 0 { rat(1, 1 << -j) } else { int(1 << j) };
            let probe = CoeffSolutionL1::assemble(alpha, &c, &C, &Rational::zero(), M);
            if !(probe.A.is_positive() && probe.B.is_positive() && !probe.Aprime.is_negative()) {
                continue;
            }
            if let Ok(s) = finish(alpha, &c, &C, M, accept) {
                return Some(s);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levi::levi_zz;
    use crate::poly::Var;

    fn always(_: &Poly<Rational>) -> bool {
        true
    }

    /// Coefficient of `u^k` in `zz`, as a polynomial in `x, y`.
    fn u_slice(p: &Poly<Rational>, k: u32) -> Poly<Rational> {
        Poly::from_terms(
            p.iter()
                .filter(|(m, _)| m.exp(Var::U) == k)
                .map(|(m, c)| (c.clone(), *m)),
        )
    }

    #[test]
    fn quarter_coefficients() {
        let s = CoeffSolutionL1::assemble(&rat(1, 4), &int(0), &int(1), &int(0), &int(1));
        assert_eq!(s.A, rat(391, 336));
        assert_eq!(s.B, rat(231, 80));
    }

    #[test]
    fn zero_alpha_special_case() {
        let s = solve_l1_with(&int(0), &int(1), &always).unwrap();
        assert_eq!(s.A, s.C.clone() / int(16));
        assert_eq!(s.D, s.C.clone() * rat(3, 8));
        assert_eq!(s.B, int(3));
        let labels: Vec<_> = s
            .constraints()
            .into_iter()
            .filter(|c| c.relation == Relation::NotApplicable)
            .map(|c| c.label)
            .collect();
        assert_eq!(labels.len(), 2);
        assert!(s.constraints().iter().all(|c| c.holds));
    }

    #[test]
    fn odd_u_rows_vanish() {
        for (n, d) in [(1, 10), (1, 4), (2, 5), (1, 2), (13, 25)] {
            let a = rat(n, d);
            for c in [int(0), rat(1, 10)] {
                let s = CoeffSolutionL1::assemble(&a, &c, &rat(3, 7), &int(0), &int(1));
                let z = levi_zz(&s.p_tilde(), &a);
                for k in [5, 3, 1] {
                    assert!(u_slice(&z, k).is_zero(), "alpha {a}, c {c}, u^{k}");
                }
            }
        }
    }

    #[test]
    fn ledger_holds_on_sample_alphas() {
        for k in 0..=5 {
            let a = rat(k, 10);
            let s = solve_l1_with(&a, &int(1), &always).unwrap();
            for c in s.constraints() {
                assert!(c.holds, "alpha {a}: {c}");
            }
        }
    }

    #[test]
    fn interval_nonempty_up_to_boundary() {
        for k in 0..=52 {
            if k == 0 {
                continue;
            }
            let iv = c_interval(&rat(k, 100));
            assert!(!iv.is_empty(), "alpha {k}/100: {iv:?}");
        }
        // Past the boundary the interval closes.
        let iv = c_interval(&rat(56, 100));
        assert!(iv.is_empty());
    }

    #[test]
    fn c_forms_agree_with_original_inequalities() {
        // Pick C on either side of each bound and compare with the ledger.
        for k in 1..=52 {
            let a = rat(k, 100);
            let iv = c_interval(&a);
            let mid = iv.pick();
            let s = CoeffSolutionL1::assemble(&a, &int(0), &mid, &rat(1, 1000), &int(1));
            assert!(s.constraints().iter().all(|c| c.holds), "alpha {a}");
            if let Some(u) = &iv.upper {
                let over = u * rat(11, 10);
                let s = CoeffSolutionL1::assemble(&a, &int(0), &over, &rat(1, 1000), &int(1));
                assert!(!s.constraints().iter().all(|c| c.holds), "alpha {a} above upper");
            }
            if iv.lower.is_positive() {
                let under = &iv.lower * rat(9, 10);
                let s = CoeffSolutionL1::assemble(&a, &int(0), &under, &rat(1, 1000), &int(1));
                assert!(!s.constraints().iter().all(|c| c.holds), "alpha {a} below lower");
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(solve_l1_with(&rat(53, 100), &int(1), &always).is_err());
        assert!(solve_l1_with(&rat(1, 4), &int(0), &always).is_err());
    }

    #[test]
    fn phi_vanishes_to_first_order_on_surface() {
        let s = CoeffSolutionL1::assemble(&rat(1, 4), &int(0), &int(1), &rat(1, 1000), &int(1));
        let on_s = |p: &Poly<Rational>| p.drop_var(Var::U).drop_var(Var::V);
        assert!(on_s(&s.phi).is_zero());
        for v in Var::ALL {
            assert!(on_s(&s.phi.diff(v)).is_zero());
        }
    }
}
