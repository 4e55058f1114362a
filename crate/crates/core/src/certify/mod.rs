//! Positivity certificates for Levi entries on punctured weighted balls, and
//! exact root isolation.
//!
//! A certificate covers the ball `ρ ≤ r*` with `ρ = max(|x|, |y|, |u|^½, |v|^½)`:
//! a domination ledger proves positivity on the whole box of its radius, and
//! dyadic annuli `r₀2^(−j−1) ≤ ρ ≤ r₀2^(−j)` beyond that radius are attempted
//! with the certified grid, innermost first. The certified radius is the outer
//! edge of the last annulus in the unbroken chain.

mod dominate;
mod grid;
mod sturm;

pub use dominate::{dominate, dominate_poly, recheck_ledger, split_sides, DominationLedger, LedgerEntry};
pub use grid::{certify_grid, GridRecord, MAX_HALVINGS};
pub use sturm::{
    check_combined_feasibility, combined_bound, isolate_root, root_claims, q6, q8, q_reduced,
    reduced_product, refine_root, CombinedFeasibility, RootClaim, RootClaims, UniPoly,
};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levi::levi_matrix;
use crate::poly::{Monomial, Poly, Var};
use crate::scalar::{format_rational, rat, serde_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("interval ({lo}, {hi}) is empty")]
    EmptyInterval { lo: Rational, hi: Rational },
    #[error("Sturm count of {poly} on ({lo}, {hi}] is {count}, expected a single sign-changing root")]
    RootCount {
        poly: String,
        lo: Rational,
        hi: Rational,
        count: usize,
    },
    #[error("positive-side term {0} is not an even monomial with positive coefficient")]
    BadPositiveTerm(Monomial),
    #[error("error monomial {0} has no dominating cover")]
    Uncovered(Monomial),
    #[error("positive monomial {monomial} is over-spent at leading order (load {load:.4})")]
    Overloaded { monomial: Monomial, load: f64 },
    #[error("domination ledger could not be closed in exact arithmetic")]
    LedgerNotClosed,
    #[error("grid check failed on annulus [{inner}, {outer}] from spacing {spacing}: {reason}")]
    GridFailed {
        inner: Rational,
        outer: Rational,
        spacing: Rational,
        reason: String,
    },
    #[error("radius or spacing {0} must be a positive dyadic rational")]
    BadRadius(Rational),
    #[error("certificate recheck failed: {0}")]
    Recheck(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StrictPositiveOffOrigin,
    Nonnegative,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnulusMethod {
    CertifiedGrid,
    Domination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusRecord {
    #[serde(with = "serde_rational")]
    pub inner: Rational,
    #[serde(with = "serde_rational")]
    pub outer: Rational,
    pub method: AnnulusMethod,
    /// Grid margin, or the domination ledger's smallest leftover share.
    #[serde(with = "serde_rational")]
    pub margin: Rational,
    pub grid: Option<GridRecord>,
}

/// Annulus schedule and grid settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    #[serde(with = "serde_rational")]
    pub r0: Rational,
    pub depth: u32,
    #[serde(with = "serde_rational")]
    pub grid_spacing: Rational,
    pub max_cells: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            r0: rat(1, 4),
            depth: 8,
            grid_spacing: rat(1, 8),
            max_cells: 1 << 18,
        }
    }
}

impl CertifyConfig {
    /// Domination only: no grid attempts beyond the ledger radius.
    pub fn domination_only() -> Self {
        CertifyConfig {
            max_cells: 0,
            ..CertifyConfig::default()
        }
    }
}

/// Evidence that `target > 0` on `0 < ρ ≤ radius` off the common zero set of
/// `strict_vars`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub target: Poly<Rational>,
    pub strict_vars: Vec<Var>,
    pub config: CertifyConfig,
    /// Outer radius of the annulus schedule actually used.
    #[serde(with = "serde_rational")]
    pub r0: Rational,
    pub annuli: Vec<AnnulusRecord>,
    pub tail: Option<DominationLedger>,
    #[serde(with = "serde_rational")]
    pub radius: Rational,
    pub verdict: Verdict,
    /// Why the schedule stopped or certification failed.
    pub note: Option<String>,
}

impl PositivityCertificate {
    pub fn is_strict(&self) -> bool {
        self.verdict == Verdict::StrictPositiveOffOrigin
    }

    /// Re-runs every check from the stored fields.
    pub fn recheck(&self) -> Result<(), CertifyError> {
        let fail = |m: String| Err(CertifyError::Recheck(m));
        let Some(tail) = &self.tail else {
            if self.verdict == Verdict::Failed {
                return Ok(());
            }
            return fail("certificate without a tail ledger claims success".into());
        };
        recheck_ledger(&self.target, tail)?;
        if tail.strict_vars != self.strict_vars {
            return fail("tail ledger proves a different strictness set".into());
        }
        let expected = if tail.is_strict() {
            Verdict::StrictPositiveOffOrigin
        } else {
            Verdict::Nonnegative
        };
        if self.verdict != expected {
            return fail(format!("verdict {:?} inconsistent with ledger", self.verdict));
        }
        // Chain: tail covers ρ ≤ r₀2^(−J), then consecutive annuli out to the radius.
        let mut reach = &self.r0 / Rational::from_integer((1u64 << self.config.depth).into());
        if reach > tail.radius {
            return fail("tail ledger does not reach the innermost annulus".into());
        }
        for a in &self.annuli {
            if a.inner != reach || a.outer <= a.inner {
                return fail(format!("annulus [{}, {}] breaks the chain", a.inner, a.outer));
            }
            match a.method {
                AnnulusMethod::Domination => {
                    if a.outer > tail.radius || a.margin != tail.min_leftover {
                        return fail(format!("domination annulus [{}, {}] not covered", a.inner, a.outer));
                    }
                }
                AnnulusMethod::CertifiedGrid => {
                    let Some(g) = &a.grid else {
                        return fail("grid annulus without grid record".into());
                    };
                    let again = certify_grid(&self.target, &a.inner, &a.outer, &g.spacing, g.max_cells)?;
                    if &again != g || again.margin != a.margin || !a.margin.is_positive() {
                        return fail(format!("grid annulus [{}, {}] does not reproduce", a.inner, a.outer));
                    }
                }
            }
            reach = a.outer.clone();
        }
        if reach != self.radius {
            return fail(format!("radius {} differs from chain end {}", self.radius, reach));
        }
        Ok(())
    }
}

/// Certifies `p > 0` off the zero set of `strict_vars` on a punctured weighted ball.
pub fn certify_target(p: &Poly<Rational>, strict_vars: &[Var], cfg: &CertifyConfig) -> PositivityCertificate {
    let mut cert = PositivityCertificate {
        target: p.clone(),
        strict_vars: strict_vars.to_vec(),
        config: cfg.clone(),
        r0: cfg.r0.clone(),
        annuli: Vec::new(),
        tail: None,
        radius: Rational::zero(),
        verdict: Verdict::Failed,
        note: None,
    };
    let ledger = match dominate_poly(p, strict_vars) {
        Ok(l) => l,
        Err(e) => {
            cert.note = Some(e.to_string());
            return cert;
        }
    };
    let two = Rational::from_integer(2.into());
    let depth_scale = Rational::from_integer((1u64 << cfg.depth).into());
    let mut r0 = cfg.r0.clone();
    while &r0 / &depth_scale > ledger.radius {
        r0 /= &two;
    }
    cert.r0 = r0.clone();
    let mut reach = &r0 / &depth_scale;
    for j in (0..cfg.depth).rev() {
        let outer = &r0 / Rational::from_integer((1u64 << j).into());
        if outer <= ledger.radius {
            cert.annuli.push(AnnulusRecord {
                inner: reach.clone(),
                outer: outer.clone(),
                method: AnnulusMethod::Domination,
                margin: ledger.min_leftover.clone(),
                grid: None,
            });
        } else if cfg.max_cells == 0 {
            cert.note = Some(format!("grid disabled beyond radius {}", format_rational(&reach)));
            break;
        } else {
            match certify_grid(p, &reach, &outer, &cfg.grid_spacing, cfg.max_cells) {
                Ok(g) => cert.annuli.push(AnnulusRecord {
                    inner: reach.clone(),
                    outer: outer.clone(),
                    method: AnnulusMethod::CertifiedGrid,
                    margin: g.margin.clone(),
                    grid: Some(g),
                }),
                Err(e) => {
                    cert.note = Some(e.to_string());
                    break;
                }
            }
        }
        reach = outer;
    }
    cert.radius = reach;
    cert.verdict = if ledger.is_strict() {
        Verdict::StrictPositiveOffOrigin
    } else {
        cert.note.get_or_insert_with(|| {
            format!(
                "no pure even power of {:?} on the positive side",
                ledger.missing_pure_powers
            )
        });
        Verdict::Nonnegative
    };
    cert.tail = Some(ledger);
    cert
}

/// Certificates for both Levi conditions of a function in model coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PshCertificate {
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    pub zz: PositivityCertificate,
    pub det16: PositivityCertificate,
}

impl PshCertificate {
    pub fn is_strict(&self) -> bool {
        self.zz.is_strict() && self.det16.is_strict()
    }

    pub fn radius(&self) -> Rational {
        self.zz.radius.clone().min(self.det16.radius.clone())
    }

    pub fn recheck(&self, phi: &Poly<Rational>) -> Result<(), CertifyError> {
        let l = levi_matrix(phi, &self.alpha);
        if self.zz.target != l.zz || self.det16.target != l.det16() {
            return Err(CertifyError::Recheck("targets are not the Levi entries of phi".into()));
        }
        self.zz.recheck()?;
        self.det16.recheck()
    }
}

/// Certifies `4∂²Φ/∂z∂z̄ > 0` and `det16 > 0` off the origin.
pub fn certify_psh(phi: &Poly<Rational>, alpha: &Rational, cfg: &CertifyConfig) -> PshCertificate {
    let l = levi_matrix(phi, alpha);
    let det = l.det16();
    let (zz, det16) = rayon::join(
        || certify_target(&l.zz, &Var::ALL, cfg),
        || certify_target(&det, &Var::ALL, cfg),
    );
    PshCertificate {
        alpha: alpha.clone(),
        zz,
        det16,
    }
}

/// Certificates that `Φ > 0` and `uΦ_u + vΦ_v > 0` off `{u = v = 0}`.
pub fn certify_sign_conditions(phi: &Poly<Rational>, cfg: &CertifyConfig) -> (PositivityCertificate, PositivityCertificate) {
    let u = Poly::var(Var::U);
    let v = Poly::var(Var::V);
    let radial = &(&u * &phi.diff(Var::U)) + &(&v * &phi.diff(Var::V));
    rayon::join(
        || certify_target(phi, &[Var::U, Var::V], cfg),
        || certify_target(&radial, &[Var::U, Var::V], cfg),
    )
}

/// `p(x,y,u,v)` restricted to the punctured ball is positive: convenience
/// wrapper used by the quadratic criterion.
pub fn strictly_positive(p: &Poly<Rational>, strict_vars: &[Var], radius: &Rational) -> bool {
    let cfg = CertifyConfig {
        r0: radius.clone(),
        ..CertifyConfig::domination_only()
    };
    let c = certify_target(p, strict_vars, &cfg);
    c.is_strict() && c.radius >= *radius
}
