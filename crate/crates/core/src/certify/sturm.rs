//! Exact univariate root counting with Sturm sequences over ℚ.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::scalar::{int, rat, serde_rational, Rational};

/// Dense univariate polynomial, coefficients from the constant term upward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        UniPoly::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::new(vec![]);
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        UniPoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).unwrap_or(&zero) - other.coeffs.get(k).unwrap_or(&zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Remainder of division by a nonzero `d`.
    pub fn rem(&self, d: &UniPoly) -> UniPoly {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.coeffs[dd].clone();
        let mut r = self.coeffs.clone();
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let q = &r[top] / &lead;
            if !q.is_zero() {
                for (k, c) in d.coeffs.iter().enumerate() {
                    r[top - dd + k] -= &q * c;
                }
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        UniPoly::new(r)
    }

    /// Signed-remainder chain `p, p', -rem(p, p'), …`.
    pub fn sturm_sequence(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone()];
        let d = self.derivative();
        if d.is_zero() {
            return seq;
        }
        seq.push(d);
        loop {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-Rational::one()));
        }
        seq
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots(&self, lo: &Rational, hi: &Rational) -> usize {
        let seq = self.sturm_sequence();
        let changes = |t: &Rational| {
            let signs: Vec<i8> = seq
                .iter()
                .map(|p| sign(&p.eval(t)))
                .filter(|&s| s != 0)
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        changes(lo).saturating_sub(changes(hi))
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{k}")?,
            }
        }
        Ok(())
    }
}

pub(crate) fn sign(q: &Rational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// An interval `(lo, hi)` holding exactly one root of `poly`, with the
/// (opposite) endpoint signs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootClaim {
    pub poly: String,
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    pub sign_lo: i8,
    pub sign_hi: i8,
    pub sturm_count: usize,
}

pub fn isolate_root(p: &UniPoly, lo: &Rational, hi: &Rational) -> Result<RootClaim, CertifyError> {
    if lo >= hi {
        return Err(CertifyError::EmptyInterval {
            lo: lo.clone(),
            hi: hi.clone(),
        });
    }
    let count = p.count_roots(lo, hi);
    let (sign_lo, sign_hi) = (sign(&p.eval(lo)), sign(&p.eval(hi)));
    if count != 1 || sign_lo == 0 || sign_hi == 0 || sign_lo == sign_hi {
        return Err(CertifyError::RootCount {
            poly: p.to_string(),
            lo: lo.clone(),
            hi: hi.clone(),
            count,
        });
    }
    Ok(RootClaim {
        poly: p.to_string(),
        lo: lo.clone(),
        hi: hi.clone(),
        sign_lo,
        sign_hi,
        sturm_count: count,
    })
}

/// Bisects an isolating interval until its width is at most `width`.
pub fn refine_root(p: &UniPoly, claim: &RootClaim, width: &Rational) -> (Rational, Rational) {
    let (mut lo, mut hi) = (claim.lo.clone(), claim.hi.clone());
    let two = int(2);
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / &two;
        let s = sign(&p.eval(&mid));
        if s == 0 {
            return (mid.clone(), mid);
        }
        if s == claim.sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// `q₆ = 495α³ + 518α² − 64α − 112`.
pub fn q6() -> UniPoly {
    UniPoly::from_ints(&[-112, -64, 518, 495])
}

/// `q₈ = 37α² + 4α − 8`.
pub fn q8() -> UniPoly {
    UniPoly::from_ints(&[-8, 4, 37])
}

/// `q = 225α³ + 62α² − 64α − 16`.
pub fn q_reduced() -> UniPoly {
    UniPoly::from_ints(&[-16, -64, 62, 225])
}

/// `30α(3α+2)(5α²+2α−2)(37α²+4α−8) − 80α(α−1)²(α+1)²(5α+2)`.
pub fn combined_bound() -> UniPoly {
    let lhs = UniPoly::from_ints(&[0, 30])
        .mul(&UniPoly::from_ints(&[2, 3]))
        .mul(&UniPoly::from_ints(&[-2, 2, 5]))
        .mul(&q8());
    let am1 = UniPoly::from_ints(&[-1, 1]);
    let ap1 = UniPoly::from_ints(&[1, 1]);
    let rhs = UniPoly::from_ints(&[0, 80])
        .mul(&am1)
        .mul(&am1)
        .mul(&ap1)
        .mul(&ap1)
        .mul(&UniPoly::from_ints(&[2, 5]));
    lhs.sub(&rhs)
}

/// `5(α − 4)·q`.
pub fn reduced_product() -> UniPoly {
    UniPoly::from_ints(&[-20, 5]).mul(&q_reduced())
}

/// The three root-location claims used by the degree-6 regime analysis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootClaims {
    /// Root of `q₆` in `(43/100, 44/100)`.
    pub alpha0: RootClaim,
    /// Root of `q₈` in `(41/100, 42/100)`.
    pub alpha1: RootClaim,
    /// Positive root of `q`, isolated in `(52/100, 10)`.
    pub q_positive: RootClaim,
    /// Sign of `q(52/100)`.
    pub q_sign_at_052: i8,
}

pub fn root_claims() -> Result<RootClaims, CertifyError> {
    let q = q_reduced();
    let q_sign_at_052 = sign(&q.eval(&rat(52, 100)));
    // No positive root of q at or below 0.52.
    let below = q.count_roots(&int(0), &rat(52, 100));
    if below != 0 || q_sign_at_052 >= 0 {
        return Err(CertifyError::RootCount {
            poly: q.to_string(),
            lo: int(0),
            hi: rat(52, 100),
            count: below,
        });
    }
    Ok(RootClaims {
        alpha0: isolate_root(&q6(), &rat(43, 100), &rat(44, 100))?,
        alpha1: isolate_root(&q8(), &rat(41, 100), &rat(42, 100))?,
        q_positive: isolate_root(&q, &rat(52, 100), &int(10))?,
        q_sign_at_052,
    })
}

/// Result of checking the two sign claims behind the degree-6 regime analysis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombinedFeasibility {
    pub holds: bool,
    /// Sample points checked per claim.
    pub samples: usize,
    /// Sturm count of the combined bound on `[43/100, 52/100]`.
    pub combined_roots: usize,
    /// Sturm count of `q` on `(0, 52/100]`.
    pub reduced_roots: usize,
    #[serde(with = "serde_rational::option")]
    pub counterexample: Option<Rational>,
}

/// Checks that the combined bound is negative on `(α₀, 0.52)` (in fact on
/// `[0.43, 0.52]`) and that `5(α−4)q > 0` on `(0, 0.52)`: Sturm counts show no
/// root inside, and 10³ rational samples per claim confirm the sign.
pub fn check_combined_feasibility() -> CombinedFeasibility {
    let f = combined_bound();
    let g = reduced_product();
    let lo = rat(43, 100);
    let hi = rat(52, 100);
    let samples = 1000usize;
    let combined_roots =
        f.count_roots(&lo, &hi) + usize::from(sign(&f.eval(&lo)) == 0);
    let reduced_roots = g.count_roots(&int(0), &hi);
    let mut counterexample = None;
    for k in 1..=samples {
        // Strictly inside (0.44, 0.52) and (0, 0.52) respectively.
        let a = rat(44, 100) + rat(8, 100) * rat(k as i64, samples as i64 + 1);
        if sign(&f.eval(&a)) >= 0 {
            counterexample = Some(a);
            break;
        }
        let b = rat(52, 100) * rat(k as i64, samples as i64 + 1);
        if sign(&g.eval(&b)) <= 0 {
            counterexample = Some(b);
            break;
        }
    }
    let holds = counterexample.is_none()
        && combined_roots == 0
        && reduced_roots == 0
        && sign(&f.eval(&hi)) < 0
        && sign(&g.eval(&hi)) > 0;
    CombinedFeasibility {
        holds,
        samples,
        combined_roots,
        reduced_roots,
        counterexample,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_roots_of_known_product() {
        // (t-1)(t-2)(t-3)
        let p = UniPoly::from_ints(&[-6, 11, -6, 1]);
        assert_eq!(p.count_roots(&int(0), &int(4)), 3);
        assert_eq!(p.count_roots(&rat(3, 2), &rat(5, 2)), 1);
        assert_eq!(p.count_roots(&int(1), &int(2)), 1); // (1, 2]
        assert!(isolate_root(&p, &int(0), &int(4)).is_err());
    }

    #[test]
    fn q6_root_between_043_and_044() {
        let c = isolate_root(&q6(), &rat(43, 100), &rat(44, 100)).unwrap();
        assert_eq!((c.sign_lo, c.sign_hi), (-1, 1));
    }

    #[test]
    fn reduction_identity() {
        // 9(9α+4)(5α+2)q₈ − 4(7α+2)q₆ = 5(α−4)q
        let direct = UniPoly::from_ints(&[36, 81])
            .mul(&UniPoly::from_ints(&[2, 5]))
            .mul(&q8())
            .sub(&UniPoly::from_ints(&[8, 28]).mul(&q6()));
        assert_eq!(direct, reduced_product());
    }

    #[test]
    fn combined_claims_hold() {
        let r = check_combined_feasibility();
        assert!(r.holds, "{r:?}");
        let claims = root_claims().unwrap();
        assert_eq!(claims.q_sign_at_052, -1);
    }

    #[test]
    fn refinement_stays_inside() {
        let c = isolate_root(&q8(), &rat(41, 100), &rat(42, 100)).unwrap();
        let (lo, hi) = refine_root(&q8(), &c, &rat(1, 1 << 30));
        assert!(lo >= c.lo && hi <= c.hi && &hi - &lo <= rat(1, 1 << 30));
    }
}
