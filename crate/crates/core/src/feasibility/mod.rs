//! Coefficient systems for the model functions Φ and their exact constraint
//! ledgers.
//!
//! Three families cover `0 ≤ α < 1`: a degree-6 ansatz (`l1`, α ≤ 13/25), a
//! degree-4 ansatz (`l11`, α ≤ 11/25) and the slab construction (`l3`,
//! ½ < α < 1) that adds `y^{2m}u² + x^{2k}u²` to a degree-2n ansatz.

mod l1;
mod l11;
mod l3;

pub use l1::{solve_l1, solve_l1_with, CoeffSolutionL1};
pub use l11::{solve_l11, solve_l11_with, CoeffSolutionL11};
pub use l3::{solve_l3, solve_l3_with, CoeffSolutionL3};

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{certify_psh, certify_sign_conditions, certify_target, CertifyConfig, CertifyError};
use crate::levi::levi_zz;
use crate::poly::{Poly, Var};
use crate::scalar::{format_rational, int, rat, serde_rational, Rational};

/// Budget for geometric searches (halving ε or `a`, doubling `C`).
pub const SEARCH_BUDGET: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeasibilityError {
    #[error("alpha = {alpha} is outside the range {range} of the {family} construction")]
    AlphaOutOfRange {
        alpha: String,
        family: Family,
        range: &'static str,
    },
    #[error("M = {0} must be positive")]
    NonpositiveM(String),
    #[error("empty C-interval at alpha = {alpha}: lower bound {lower} from {lower_from}, upper bound {upper} from {upper_from}")]
    EmptyInterval {
        alpha: String,
        lower: String,
        lower_from: String,
        upper: String,
        upper_from: String,
    },
    #[error("constraint violated at alpha = {alpha}: {constraint}")]
    Infeasible { alpha: String, constraint: String },
    #[error("{what} not found within {tries} steps at alpha = {alpha}")]
    Budget {
        alpha: String,
        what: &'static str,
        tries: u32,
    },
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

/// Which coefficient system produced a Φ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    L1,
    L11,
    L3,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::L1 => "l1",
            Family::L11 => "l11",
            Family::L3 => "l3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Eq,
    Lt,
    Gt,
    /// Degenerate at this α; recorded but not asserted.
    NotApplicable,
}

/// One exact equality or strict inequality `lhs ⋈ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub label: String,
    pub relation: Relation,
    #[serde(with = "serde_rational")]
    pub lhs: Rational,
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
    pub holds: bool,
}

impl ConstraintCheck {
    pub fn new(label: impl Into<String>, relation: Relation, lhs: Rational, rhs: Rational) -> Self {
        let holds = match relation {
            Relation::Eq => lhs == rhs,
            Relation::Lt => lhs < rhs,
            Relation::Gt => lhs > rhs,
            Relation::NotApplicable => true,
        };
        ConstraintCheck {
            label: label.into(),
            relation,
            lhs,
            rhs,
            holds,
        }
    }

    pub fn not_applicable(label: impl Into<String>) -> Self {
        ConstraintCheck::new(label, Relation::NotApplicable, Rational::zero(), Rational::zero())
    }
}

impl std::fmt::Display for ConstraintCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = match self.relation {
            Relation::Eq => "=",
            Relation::Lt => "<",
            Relation::Gt => ">",
            Relation::NotApplicable => return write!(f, "{}: n/a", self.label),
        };
        write!(
            f,
            "{}: {} {} {} [{}]",
            self.label,
            format_rational(&self.lhs),
            op,
            format_rational(&self.rhs),
            if self.holds { "ok" } else { "VIOLATED" }
        )
    }
}

/// Acceptance test run on each candidate Φ during the geometric searches.
pub type Accept<'a> = &'a (dyn Fn(&Poly<Rational>) -> bool + Sync);

/// Default acceptance: both Levi conditions, `Φ > 0` and the radial condition,
/// all certified strict by domination.
pub fn phi_accept(alpha: &Rational) -> impl Fn(&Poly<Rational>) -> bool + Sync + '_ {
    move |phi| {
        let cfg = CertifyConfig::domination_only();
        if !certify_psh(phi, alpha, &cfg).is_strict() {
            return false;
        }
        let (pos, radial) = certify_sign_conditions(phi, &cfg);
        pos.is_strict() && radial.is_strict()
    }
}

/// Acceptance that only asks for a strict `4∂²Φ/∂z∂z̄`.
pub fn zz_accept(alpha: &Rational) -> impl Fn(&Poly<Rational>) -> bool + Sync + '_ {
    move |phi| certify_target(&levi_zz(phi, alpha), &Var::ALL, &CertifyConfig::domination_only()).is_strict()
}

/// Region for the quadratic criterion: the weighted box of `radius`, minus the
/// common zero set of `vars`.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub radius: Rational,
    pub vars: Vec<Var>,
}

impl Region {
    pub fn new(radius: Rational, vars: &[Var]) -> Self {
        Region {
            radius,
            vars: vars.to_vec(),
        }
    }
}

/// Certifies `b₁² < 4b₂b₀` on `region`, which makes `b₂u² + b₁u + b₀` positive
/// off `{u = 0}`. Errors when `b₂` itself does not certify.
pub fn quad_pos_ok(
    b2: &Poly<Rational>,
    b1: &Poly<Rational>,
    b0: &Poly<Rational>,
    region: &Region,
) -> Result<bool, FeasibilityError> {
    let cfg = CertifyConfig {
        r0: region.radius.clone(),
        ..CertifyConfig::domination_only()
    };
    let lead = certify_target(b2, &region.vars, &cfg);
    if !lead.is_strict() || lead.radius < region.radius {
        return Err(CertifyError::Recheck(format!(
            "leading coefficient {} not certified positive: {}",
            b2,
            lead.note.unwrap_or_else(|| "radius too small".into())
        ))
        .into());
    }
    let disc = &(&(b2 * b0) * &Poly::constant(int(4))) - &(b1 * b1);
    let cert = certify_target(&disc, &region.vars, &cfg);
    Ok(cert.is_strict() && cert.radius >= region.radius)
}

/// Exponent test for `u^{2k} + a|x|^γ|y|^δ u^l + b|x|^{γ₁}|y|^{δ₁}` to be
/// positive near the origin: `γ₁ < 2kγ/(2k−l)` and `δ₁ < 2kδ/(2k−l)`.
///
/// A variable absent from both the middle and the last term (`γ = γ₁ = 0`)
/// imposes no condition. The coefficient `a` never enters.
#[allow(clippy::too_many_arguments)]
pub fn mixed_pos_ok(
    k: u32,
    _a: &Rational,
    gamma: u32,
    delta: u32,
    l: u32,
    b: &Rational,
    gamma1: u32,
    delta1: u32,
) -> bool {
    if !b.is_positive() || l == 0 || l >= 2 * k {
        return false;
    }
    let (two_k, gap) = (2 * u64::from(k), 2 * u64::from(k) - u64::from(l));
    let ok = |e: u32, e1: u32| (e == 0 && e1 == 0) || u64::from(e1) * gap < two_k * u64::from(e);
    ok(gamma, gamma1) && ok(delta, delta1)
}

/// Minimal `m` with `((2m+1)α − 2m)² < m(2m−1)(α−1)²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabSelection {
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    pub m: u32,
    /// Weight of `v²`; any δ > 0 works and the assembled Φ uses 1.
    #[serde(with = "serde_rational")]
    pub delta: Rational,
}

/// `((2m+1)α − 2m)² < m(2m−1)(α−1)²`.
pub fn slab_condition(alpha: &Rational, m: u32) -> bool {
    let m = int(i64::from(m));
    let lhs = &(&(&(&m * int(2)) + int(1)) * alpha) - &(&m * int(2));
    let rhs = &(&m * &(&(&m * int(2)) - int(1))) * &(alpha - int(1)) * (alpha - int(1));
    &lhs * &lhs < rhs
}

pub fn select_m(alpha: &Rational) -> Result<SlabSelection, FeasibilityError> {
    if *alpha <= rat(1, 2) || *alpha >= int(1) {
        return Err(FeasibilityError::AlphaOutOfRange {
            alpha: format_rational(alpha),
            family: Family::L3,
            range: "1/2 < alpha < 1",
        });
    }
    // Terminates: b_m → 1 and a_{m+1} < b_m, so every α < 1 lies in some slab.
    let m = (1u32..)
        .find(|&m| slab_condition(alpha, m))
        .expect("slab intervals cover (1/2, 1)");
    Ok(SlabSelection {
        alpha: alpha.clone(),
        m,
        delta: Rational::one(),
    })
}

/// Slab endpoints `(a_m, b_m)` in floating point, for display.
pub fn slab_bounds(m: u32) -> (f64, f64) {
    let m = f64::from(m);
    let s = ((2.0 * m - 1.0) * m).sqrt();
    ((2.0 * m - s) / (2.0 * m + 1.0 - s), (2.0 * m + s) / (2.0 * m + 1.0 + s))
}

/// Exact checks behind the slab monotonicity: `16m² + 8m − 9 > 0`, the squared
/// form of `√((2m+1)(m+1)) − √((2m−1)m) < 2`, and the squared form of
/// `√((2m+1)(m+1)) + √((2m−1)m) > 2`.
pub fn slab_monotonicity(m: u64) -> [bool; 3] {
    let m = i128::from(m);
    let p = (2 * m + 1) * (m + 1);
    let q = (2 * m - 1) * m;
    let poly = 16 * m * m + 8 * m - 9 > 0;
    // √p − √q < 2 ⇔ p − q − 4 < 4√q.
    let t = p - q - 4;
    let diff = t < 0 || t * t < 16 * q;
    // √p + √q > 2 ⇔ p + q − 4 > −2√(pq).
    let s = 4 - p - q;
    let sum = s < 0 || s * s < 4 * p * q;
    [poly, diff, sum]
}

/// A solved coefficient system of any family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CoeffSolution {
    L1(CoeffSolutionL1),
    L11(CoeffSolutionL11),
    L3(CoeffSolutionL3),
}

impl CoeffSolution {
    pub fn family(&self) -> Family {
        match self {
            CoeffSolution::L1(_) => Family::L1,
            CoeffSolution::L11(_) => Family::L11,
            CoeffSolution::L3(_) => Family::L3,
        }
    }

    pub fn alpha(&self) -> &Rational {
        match self {
            CoeffSolution::L1(s) => &s.alpha,
            CoeffSolution::L11(s) => &s.alpha,
            CoeffSolution::L3(s) => &s.alpha,
        }
    }

    pub fn phi(&self) -> &Poly<Rational> {
        match self {
            CoeffSolution::L1(s) => &s.phi,
            CoeffSolution::L11(s) => &s.phi,
            CoeffSolution::L3(s) => &s.phi,
        }
    }

    /// The exact constraint ledger, recomputed from the coefficients.
    pub fn constraints(&self) -> Vec<ConstraintCheck> {
        match self {
            CoeffSolution::L1(s) => s.constraints(),
            CoeffSolution::L11(s) => s.constraints(),
            CoeffSolution::L3(s) => s.constraints(),
        }
    }

    pub fn ledger_holds(&self) -> bool {
        self.constraints().iter().all(|c| c.holds)
    }

    pub fn document(&self) -> CertificateDocument {
        let (coefficients, integers) = match self {
            CoeffSolution::L1(s) => (s.coefficients(), BTreeMap::new()),
            CoeffSolution::L11(s) => (s.coefficients(), BTreeMap::new()),
            CoeffSolution::L3(s) => (s.coefficients(), s.integers()),
        };
        CertificateDocument {
            alpha: format_rational(self.alpha()),
            family: self.family(),
            coefficients: coefficients
                .into_iter()
                .map(|(k, v)| (k.to_string(), format_rational(&v)))
                .collect(),
            integers: integers.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            phi: self.phi().to_string(),
        }
    }
}

/// Serialized form of a solution; rationals are `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub alpha: String,
    pub family: Family,
    pub coefficients: BTreeMap<String, String>,
    pub integers: BTreeMap<String, u32>,
    pub phi: String,
}

/// Φ for the quadratic model at `α ∈ [0, 1)`: the degree-6 family up to ½ and
/// the slab family above.
pub fn build_phi(alpha: &Rational, m: &Rational) -> Result<CoeffSolution, FeasibilityError> {
    if alpha.is_negative() || *alpha >= int(1) {
        return Err(FeasibilityError::AlphaOutOfRange {
            alpha: format_rational(alpha),
            family: if *alpha >= int(1) { Family::L3 } else { Family::L1 },
            range: "0 <= alpha < 1",
        });
    }
    if *alpha <= rat(1, 2) {
        solve_l1(alpha, m).map(CoeffSolution::L1)
    } else {
        solve_l3(alpha, m).map(CoeffSolution::L3)
    }
}

/// `(1 + x² + y²)v²`, shared by every family.
pub(crate) fn v_part() -> Poly<Rational> {
    let one = Rational::one();
    Poly::from_terms([
        (one.clone(), crate::poly::Monomial::new(0, 0, 0, 2)),
        (one.clone(), crate::poly::Monomial::new(2, 0, 0, 2)),
        (one, crate::poly::Monomial::new(0, 2, 0, 2)),
    ])
}

/// `M(x² + y²)u^e`.
pub(crate) fn m_part(m: &Rational, e: u32) -> Poly<Rational> {
    Poly::from_terms([
        (m.clone(), crate::poly::Monomial::new(2, 0, e, 0)),
        (m.clone(), crate::poly::Monomial::new(0, 2, e, 0)),
    ])
}

pub(crate) fn check_m(m: &Rational) -> Result<(), FeasibilityError> {
    if m.is_positive() {
        Ok(())
    } else {
        Err(FeasibilityError::NonpositiveM(format_rational(m)))
    }
}

/// Halves `start` until `accept` passes, at most [`SEARCH_BUDGET`] times.
pub(crate) fn halve_until<T>(
    start: Rational,
    alpha: &Rational,
    what: &'static str,
    mut attempt: impl FnMut(&Rational) -> Option<T>,
) -> Result<T, FeasibilityError> {
    let mut x = start;
    for _ in 0..SEARCH_BUDGET {
        if let Some(t) = attempt(&x) {
            return Ok(t);
        }
        x /= int(2);
    }
    Err(FeasibilityError::Budget {
        alpha: format_rational(alpha),
        what,
        tries: SEARCH_BUDGET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Monomial;

    fn p(terms: &[(i64, [u32; 4])]) -> Poly<Rational> {
        Poly::from_terms(terms.iter().map(|(c, e)| (int(*c), Monomial(*e))))
    }

    #[test]
    fn quadratic_criterion_examples() {
        let xy = Region::new(rat(1, 2), &[Var::X, Var::Y]);
        let one = p(&[(1, [0, 0, 0, 0])]);
        let zero = Poly::zero();
        let x2y2 = p(&[(1, [2, 0, 0, 0]), (1, [0, 2, 0, 0])]);
        assert!(quad_pos_ok(&one, &zero, &x2y2, &xy).unwrap());
        let two_x = p(&[(2, [1, 0, 0, 0])]);
        let x2 = p(&[(1, [2, 0, 0, 0])]);
        assert!(!quad_pos_ok(&one, &two_x, &x2, &xy).unwrap());
    }

    #[test]
    fn quadratic_criterion_slab_triple() {
        // m = 2, α = 3/4: 12y², −4((5α − 4))y⁴ = y⁴, (1/8)y⁶.
        let m = 2u32;
        let alpha = rat(3, 4);
        let mm = int(i64::from(m));
        let b2 = Poly::mono(&(&mm * int(2)) * &(&(&mm * int(2)) - int(1)), 0, 2 * m - 2, 0, 0);
        let mid = &(&(&(&mm * int(2)) + int(1)) * &alpha) - &(&mm * int(2));
        let b1 = Poly::mono(&mid * int(-4), 0, 2 * m, 0, 0);
        let b0 = Poly::mono(&(&alpha - int(1)) * &(&alpha - int(1)) * int(2), 0, 2 * m + 2, 0, 0);
        assert!(quad_pos_ok(&b2, &b1, &b0, &Region::new(rat(1, 2), &[Var::Y])).unwrap());
        // The rational form the criterion reduces to.
        assert!(&mid * &mid == rat(1, 16) && rat(1, 16) < rat(6, 16));
    }

    #[test]
    fn quadratic_criterion_rejects_indefinite_leading_term() {
        let b2 = p(&[(1, [2, 0, 0, 0]), (-1, [0, 2, 0, 0])]);
        let r = quad_pos_ok(&b2, &Poly::zero(), &b2, &Region::new(rat(1, 2), &[Var::X, Var::Y]));
        assert!(r.is_err());
    }

    #[test]
    fn mixed_power_examples() {
        let one = int(1);
        assert!(mixed_pos_ok(1, &one, 2, 2, 1, &one, 2, 2));
        // γ₁ = 2kγ/(2k−l) exactly: k = 1, l = 1, γ = 2 gives 4.
        assert!(!mixed_pos_ok(1, &one, 2, 2, 1, &one, 4, 2));
        assert!(!mixed_pos_ok(1, &one, 2, 2, 1, &int(0), 2, 2));
        assert!(!mixed_pos_ok(1, &one, 2, 2, 2, &one, 2, 2));
    }

    #[test]
    fn mixed_power_slab_usage() {
        // x^{2k}u against u^{2n} and x^{2k+2}: γ₁(2n−1) < 2n·γ ⇔ k > 2n − 1.
        let one = int(1);
        let (n, k) = (3, 5);
        assert!(!mixed_pos_ok(n, &one, 2 * k, 0, 1, &one, 2 * k + 2, 0));
        assert!(mixed_pos_ok(n, &one, 2 * (k + 1), 0, 1, &one, 2 * (k + 1) + 2, 0));
        // Against u^{2n−2}: k > 2n − 3 holds at k = 5.
        assert!(mixed_pos_ok(n - 1, &one, 2 * k, 0, 1, &one, 2 * k + 2, 0));
    }

    #[test]
    fn select_m_examples() {
        assert_eq!(select_m(&rat(3, 4)).unwrap().m, 2);
        assert_eq!(select_m(&rat(51, 100)).unwrap().m, 1);
        assert!(!slab_condition(&rat(3, 4), 1));
        assert!(select_m(&rat(1, 2)).is_err());
        assert!(select_m(&int(1)).is_err());
        let m99 = select_m(&rat(99, 100)).unwrap().m;
        assert!(m99 > 10);
    }

    #[test]
    fn slab_monotonicity_holds() {
        for m in 1..=1000 {
            assert_eq!(slab_monotonicity(m), [true; 3], "m = {m}");
        }
    }

    #[test]
    fn slab_bounds_bracket_selection() {
        for (n, d) in [(51, 100), (3, 4), (9, 10), (99, 100)] {
            let a = rat(n, d);
            let m = select_m(&a).unwrap().m;
            let (lo, hi) = slab_bounds(m);
            let af = n as f64 / d as f64;
            assert!(lo < af && af < hi);
        }
        assert!((slab_bounds(1).0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn build_phi_dispatch() {
        assert_eq!(build_phi(&int(0), &int(1)).unwrap().family(), Family::L1);
        assert!(build_phi(&int(1), &int(1)).is_err());
        assert!(build_phi(&rat(-1, 10), &int(1)).is_err());
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn select_m_is_monotone(a in 501u32..999, b in 501u32..999) {
            let (lo, hi) = (a.min(b), a.max(b));
            let mlo = select_m(&rat(i64::from(lo), 1000)).unwrap().m;
            let mhi = select_m(&rat(i64::from(hi), 1000)).unwrap().m;
            prop_assert!(mlo <= mhi);
            prop_assert!(mlo == 1 || !slab_condition(&rat(i64::from(lo), 1000), mlo - 1));
        }
    }
}
