//! Monomial domination on a weighted box.
//!
//! On `|x|, |y| ≤ r`, `|u|, |v| ≤ r²` every error term `c·m` is bounded by a
//! weighted AM–GM split onto one or two positive even monomials `m_i, m_j`:
//! if `e' = λ·a_i + (1−λ)·a_j ≤ e` componentwise, then
//! `|c·m| ≤ |c| r^s m_i^λ m_j^(1−λ) ≤ β_i m_i + β_j m_j` with `s = w(e) − w(e')`
//! as soon as `|c| r^s ≤ (β_i/λ)^λ (β_j/(1−λ))^(1−λ)`. Raising to the
//! denominator `q` of `λ = p/q` makes the check exact over ℚ. The ledger
//! records every split and its allotments, and the allotments drawn from each
//! positive monomial must stay strictly below its coefficient.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::poly::{Monomial, Poly, Var, WEIGHTS};
use crate::scalar::{f64_to_rational, rational_to_f64, serde_rational, Rational};

/// One dominated error term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub error: Monomial,
    #[serde(with = "serde_rational")]
    pub coef: Rational,
    pub first: Monomial,
    pub second: Option<Monomial>,
    /// AM–GM weight on `first`; exactly 1 for a single cover.
    #[serde(with = "serde_rational")]
    pub lambda: Rational,
    /// Weighted-degree gap `w(e) − w(e')`.
    #[serde(with = "serde_rational")]
    pub slack: Rational,
    #[serde(with = "serde_rational")]
    pub beta_first: Rational,
    #[serde(with = "serde_rational::option")]
    pub beta_second: Option<Rational>,
}

/// Proof that the error side is dominated on the box of radius `radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationLedger {
    #[serde(with = "serde_rational")]
    pub radius: Rational,
    pub strict_vars: Vec<Var>,
    pub entries: Vec<LedgerEntry>,
    /// Smallest unspent share `1 − Σβ/b` over the positive monomials.
    #[serde(with = "serde_rational")]
    pub min_leftover: Rational,
    /// Variables in `strict_vars` without a pure even power on the positive side.
    pub missing_pure_powers: Vec<Var>,
}

impl DominationLedger {
    /// The leftover positive part vanishes only where every strict variable does.
    pub fn is_strict(&self) -> bool {
        self.missing_pure_powers.is_empty()
    }
}

/// Splits `p` into even monomials with positive coefficient and the rest.
pub fn split_sides(p: &Poly<Rational>) -> (Vec<(Rational, Monomial)>, Vec<(Rational, Monomial)>) {
    let mut pos = Vec::new();
    let mut err = Vec::new();
    for (m, c) in p.iter() {
        if m.is_even() && c.is_positive() {
            pos.push((c.clone(), *m));
        } else {
            err.push((c.clone(), *m));
        }
    }
    (pos, err)
}

fn pure_power_var(m: &Monomial) -> Option<Var> {
    let nz: Vec<usize> = (0..4).filter(|&k| m.0[k] > 0).collect();
    if nz.len() == 1 {
        Some(Var::ALL[nz[0]])
    } else {
        None
    }
}

fn missing_pure_powers(pos: &[(Rational, Monomial)], strict_vars: &[Var]) -> Vec<Var> {
    // A surviving constant term is positive everywhere.
    if pos.iter().any(|(_, m)| m.weighted_degree() == 0) {
        return Vec::new();
    }
    strict_vars
        .iter()
        .copied()
        .filter(|v| !pos.iter().any(|(_, m)| pure_power_var(m) == Some(*v)))
        .collect()
}

/// Small exact fraction `num/den` with `den > 0`.
#[derive(Clone, Copy, Debug)]
struct Frac {
    num: i64,
    den: i64,
}

impl Frac {
    fn new(num: i64, den: i64) -> Frac {
        if den < 0 {
            Frac {
                num: -num,
                den: -den,
            }
        } else {
            Frac { num, den }
        }
    }
    fn lt(self, o: Frac) -> bool {
        (self.num as i128) * (o.den as i128) < (o.num as i128) * (self.den as i128)
    }
    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
    fn reduced(self) -> Frac {
        let g = num_integer::gcd(self.num, self.den).max(1);
        Frac::new(self.num / g, self.den / g)
    }
}

#[derive(Clone, Debug)]
struct Cover {
    i: usize,
    j: Option<usize>,
    /// Weight on `i`, reduced.
    lambda: Frac,
    /// Slack times the denominator of `lambda`.
    slack: f64,
    /// `ln((b_i/λ)^λ (b_j/(1−λ))^(1−λ))`.
    log_g: f64,
}

fn weight(e: &[u32; 4]) -> i64 {
    e.iter().zip(WEIGHTS).map(|(a, w)| (*a * w) as i64).sum()
}

/// All covers of the error exponent `e`.
fn covers_for(e: &Monomial, pos: &[(f64, Monomial)]) -> Vec<Cover> {
    let we = weight(&e.0);
    let below: Vec<u8> = pos
        .iter()
        .map(|(_, a)| {
            (0..4).fold(0u8, |mask, k| {
                if a.0[k] <= e.0[k] {
                    mask | (1 << k)
                } else {
                    mask
                }
            })
        })
        .collect();
    let mut out = Vec::new();
    for (i, (bi, a)) in pos.iter().enumerate() {
        if below[i] == 0b1111 {
            out.push(Cover {
                i,
                j: None,
                lambda: Frac::new(1, 1),
                slack: (we - weight(&a.0)) as f64,
                log_g: bi.ln(),
            });
        }
    }
    for i in 0..pos.len() {
        for j in (i + 1)..pos.len() {
            if below[i] | below[j] != 0b1111 {
                continue;
            }
            let (ai, aj) = (&pos[i].1 .0, &pos[j].1 .0);
            // λ·a_i + (1−λ)·a_j ≤ e, i.e. λ(a_i − a_j) ≤ e − a_j per coordinate.
            let mut lo = Frac::new(0, 1);
            let mut hi = Frac::new(1, 1);
            let mut ok = true;
            for k in 0..4 {
                let d = ai[k] as i64 - aj[k] as i64;
                let rhs = e.0[k] as i64 - aj[k] as i64;
                if d == 0 {
                    if rhs < 0 {
                        ok = false;
                        break;
                    }
                } else if d > 0 {
                    let b = Frac::new(rhs, d);
                    if b.lt(hi) {
                        hi = b;
                    }
                } else {
                    let b = Frac::new(rhs, d);
                    if lo.lt(b) {
                        lo = b;
                    }
                }
            }
            if !ok || hi.lt(lo) {
                continue;
            }
            let (wi, wj) = (weight(ai), weight(aj));
            for lam in [lo, hi] {
                let lam = lam.reduced();
                if lam.num <= 0 || lam.num >= lam.den {
                    continue;
                }
                let l = lam.to_f64();
                let slack_q = lam.den * we - lam.num * wi - (lam.den - lam.num) * wj;
                let log_g = l * (pos[i].0.ln() - l.ln())
                    + (1.0 - l) * (pos[j].0.ln() - (1.0 - l).ln());
                out.push(Cover {
                    i,
                    j: Some(j),
                    lambda: lam,
                    slack: slack_q as f64 / lam.den as f64,
                    log_g,
                });
            }
        }
    }
    out
}

/// Chosen cover for one error, with the share of each cover monomial it needs
/// at radius `r`: `t(r) = |c| r^s / G`.
#[derive(Clone, Debug)]
struct Assignment {
    err: usize,
    cover: Cover,
    log_c: f64,
}

impl Assignment {
    fn log_share(&self, log_r: f64) -> f64 {
        self.log_c + self.cover.slack * log_r - self.cover.log_g
    }
    fn monos(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.cover.i).chain(self.cover.j)
    }
}

/// Fraction of each positive budget kept back so leftovers stay strictly positive.
const RESERVE: f64 = 1.0 / 256.0;

/// Builds a domination ledger for `p`, proving `p ≥ Σ leftover·m_i ≥ 0` on the
/// weighted box of the returned radius (at most 1).
pub fn dominate_poly(p: &Poly<Rational>, strict_vars: &[Var]) -> Result<DominationLedger, CertifyError> {
    let (pos, err) = split_sides(p);
    dominate(&pos, &err, strict_vars)
}

/// Dominates `error_side` by `positive_side`; positive monomials must be even
/// with positive coefficients.
pub fn dominate(
    positive_side: &[(Rational, Monomial)],
    error_side: &[(Rational, Monomial)],
    strict_vars: &[Var],
) -> Result<DominationLedger, CertifyError> {
    for (b, m) in positive_side {
        if !b.is_positive() || !m.is_even() {
            return Err(CertifyError::BadPositiveTerm(*m));
        }
    }
    let pos_f: Vec<(f64, Monomial)> = positive_side
        .iter()
        .map(|(b, m)| (rational_to_f64(b), *m))
        .collect();
    let errs: Vec<(Rational, Monomial)> = error_side
        .iter()
        .filter(|(c, _)| !c.is_zero())
        .cloned()
        .collect();
    let np = positive_side.len();

    // Choose covers: positive-slack covers when available (they cost nothing as
    // r → 0), otherwise the cheapest leading-order cover.
    let mut lead: Vec<(Assignment, Vec<Cover>)> = Vec::new();
    let mut tail: Vec<Assignment> = Vec::new();
    for (k, (c, e)) in errs.iter().enumerate() {
        let log_c = rational_to_f64(&c.abs()).ln();
        let covers = covers_for(e, &pos_f);
        let (zero, positive): (Vec<Cover>, Vec<Cover>) =
            covers.into_iter().partition(|cv| cv.slack == 0.0);
        // Radius at which a cover alone would use a quarter of its budget.
        let best_tail = positive.into_iter().max_by(|a, b| {
            let ra = ((a.log_g - 4f64.ln()) - log_c) / a.slack;
            let rb = ((b.log_g - 4f64.ln()) - log_c) / b.slack;
            ra.total_cmp(&rb)
        });
        match best_tail {
            Some(cover) => tail.push(Assignment { err: k, cover, log_c }),
            None => {
                if zero.is_empty() {
                    return Err(CertifyError::Uncovered(*e));
                }
                let best = zero
                    .iter()
                    .min_by(|a, b| (log_c - a.log_g).total_cmp(&(log_c - b.log_g)))
                    .cloned()
                    .expect("nonempty");
                lead.push((
                    Assignment {
                        err: k,
                        cover: best,
                        log_c,
                    },
                    zero,
                ));
            }
        }
    }

    // Leading-order loads, balanced greedily from the most expensive error down.
    lead.sort_by(|a, b| {
        let ta = a.0.log_c - a.0.cover.log_g;
        let tb = b.0.log_c - b.0.cover.log_g;
        tb.total_cmp(&ta)
    });
    let mut load = vec![0.0f64; np];
    let mut lead_assign: Vec<Assignment> = Vec::new();
    for (mut a, options) in lead {
        let pick = options
            .iter()
            .min_by(|x, y| {
                let worst = |cv: &Cover| {
                    let t = (a.log_c - cv.log_g).exp();
                    std::iter::once(cv.i)
                        .chain(cv.j)
                        .map(|i| load[i] + t)
                        .fold(0.0, f64::max)
                };
                worst(x).total_cmp(&worst(y))
            })
            .cloned()
            .expect("nonempty");
        a.cover = pick;
        let t = a.log_share(0.0).exp();
        for i in a.monos().collect::<Vec<_>>() {
            load[i] += t;
        }
        lead_assign.push(a);
    }
    if let Some((i, l)) = load
        .iter()
        .enumerate()
        .filter(|(_, l)| **l >= 1.0 - 2.0 * RESERVE)
        .max_by(|a, b| a.1.total_cmp(b.1))
    {
        return Err(CertifyError::Overloaded {
            monomial: positive_side[i].1,
            load: *l,
        });
    }

    // Largest radius at which the positive-slack shares fit in the remaining budgets.
    let cap: Vec<f64> = load.iter().map(|l| (1.0 - l) * (1.0 - RESERVE) - RESERVE).collect();
    let fits = |log_r: f64| {
        let mut used = vec![0.0f64; np];
        for a in &tail {
            let t = a.log_share(log_r).exp();
            for i in a.monos() {
                used[i] += t;
            }
        }
        used.iter().zip(&cap).all(|(u, c)| u <= c)
    };
    let mut log_r = 0.0;
    if !fits(0.0) {
        let (mut lo, mut hi) = (-4000.0f64, 0.0f64);
        if !fits(lo) {
            return Err(CertifyError::LedgerNotClosed);
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        log_r = lo;
    }

    // Exact closing: rationalize the radius and shares, verify, shrink on failure.
    let mut radius = dyadic_radius(log_r);
    for _ in 0..60 {
        match close_exactly(positive_side, &errs, &lead_assign, &tail, &radius, strict_vars) {
            Ok(ledger) => return Ok(ledger),
            Err(CertifyError::LedgerNotClosed) => radius /= Rational::from_integer(2.into()),
            Err(e) => return Err(e),
        }
    }
    Err(CertifyError::LedgerNotClosed)
}

/// Dyadic rational just below `exp(log_r)`, capped at 1.
fn dyadic_radius(log_r: f64) -> Rational {
    if log_r >= 0.0 {
        return Rational::one();
    }
    let r = log_r.exp() * (1.0 - 1e-9);
    let bits = ((-log_r / std::f64::consts::LN_2).ceil() as u32).saturating_add(40);
    if r > 0.0 && r.is_finite() {
        crate::scalar::dyadic_floor(r, bits)
    } else {
        // Below f64 range: build 2^-k directly.
        let k = (-log_r / std::f64::consts::LN_2).ceil() as usize + 1;
        Rational::new(BigInt::one(), BigInt::one() << k)
    }
}

fn lambda_rational(f: Frac) -> Rational {
    Rational::new(BigInt::from(f.num), BigInt::from(f.den))
}

fn close_exactly(
    positive_side: &[(Rational, Monomial)],
    errs: &[(Rational, Monomial)],
    lead: &[Assignment],
    tail: &[Assignment],
    radius: &Rational,
    strict_vars: &[Var],
) -> Result<DominationLedger, CertifyError> {
    let log_r = rational_log(radius);
    let mut entries: Vec<(usize, LedgerEntry)> = Vec::new();
    for a in lead.iter().chain(tail) {
        let (c, e) = &errs[a.err];
        let share = a.log_share(if a.cover.slack == 0.0 { 0.0 } else { log_r });
        let mut f = share.exp() * (1.0 + 1e-9);
        let lambda = lambda_rational(a.cover.lambda);
        let first = positive_side[a.cover.i].1;
        let second = a.cover.j.map(|j| positive_side[j].1);
        let slack = exact_slack(e, &first, second.as_ref(), &lambda);
        let mut attempt = 0;
        let entry = loop {
            let fr = f64_to_rational(f);
            let entry = LedgerEntry {
                error: *e,
                coef: c.clone(),
                first,
                second,
                lambda: lambda.clone(),
                slack: slack.clone(),
                beta_first: &fr * &positive_side[a.cover.i].0,
                beta_second: a.cover.j.map(|j| &fr * &positive_side[j].0),
            };
            if amgm_holds(&entry, radius) {
                break entry;
            }
            attempt += 1;
            if attempt > 8 {
                return Err(CertifyError::LedgerNotClosed);
            }
            f *= 1.0 + 1e-6 * 10f64.powi(attempt);
        };
        entries.push((a.err, entry));
    }
    entries.sort_by_key(|(k, _)| *k);
    let entries: Vec<LedgerEntry> = entries.into_iter().map(|(_, e)| e).collect();
    let min_leftover = leftover(positive_side, &entries)?;
    if !min_leftover.is_positive() {
        return Err(CertifyError::LedgerNotClosed);
    }
    Ok(DominationLedger {
        radius: radius.clone(),
        strict_vars: strict_vars.to_vec(),
        entries,
        min_leftover,
        missing_pure_powers: missing_pure_powers(positive_side, strict_vars),
    })
}

fn rational_log(q: &Rational) -> f64 {
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = (nb.max(db) - 60).max(0) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(1.0);
    let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
    if n > 0.0 && d > 0.0 {
        n.ln() - d.ln()
    } else {
        (nb - db) as f64 * std::f64::consts::LN_2
    }
}

fn exact_slack(e: &Monomial, first: &Monomial, second: Option<&Monomial>, lambda: &Rational) -> Rational {
    let w = |m: &Monomial| Rational::from_integer(BigInt::from(m.weighted_degree()));
    let mut s = w(e) - lambda * w(first);
    if let Some(sec) = second {
        s -= (Rational::one() - lambda) * w(sec);
    }
    s
}

/// `|c|^q r^(s q) ≤ (β₁/λ)^p (β₂/(1−λ))^(q−p)` for `λ = p/q`.
fn amgm_holds(entry: &LedgerEntry, radius: &Rational) -> bool {
    let lam = &entry.lambda;
    let p = lam.numer().to_u32();
    let q = lam.denom().to_u32();
    let (Some(p), Some(q)) = (p, q) else {
        return false;
    };
    let sq = &entry.slack * Rational::from_integer(BigInt::from(q));
    if !sq.is_integer() || sq.is_negative() {
        return false;
    }
    let Some(sq) = sq.to_integer().to_u32() else {
        return false;
    };
    let lhs = num_traits::pow(entry.coef.abs(), q as usize) * num_traits::pow(radius.clone(), sq as usize);
    let mut rhs = num_traits::pow(&entry.beta_first / lam, p as usize);
    if p < q {
        let Some(b2) = &entry.beta_second else {
            return false;
        };
        let rest = Rational::one() - lam;
        rhs *= num_traits::pow(b2 / &rest, (q - p) as usize);
    }
    lhs <= rhs
}

/// Minimum over positive monomials of `1 − spent/b`; errors if a cover names a
/// monomial that is not on the positive side.
fn leftover(
    positive_side: &[(Rational, Monomial)],
    entries: &[LedgerEntry],
) -> Result<Rational, CertifyError> {
    let mut spent: BTreeMap<Monomial, Rational> = BTreeMap::new();
    for e in entries {
        *spent.entry(e.first).or_insert_with(Rational::zero) += &e.beta_first;
        if let (Some(m), Some(b)) = (e.second, &e.beta_second) {
            *spent.entry(m).or_insert_with(Rational::zero) += b;
        }
    }
    let budgets: BTreeMap<Monomial, &Rational> =
        positive_side.iter().map(|(b, m)| (*m, b)).collect();
    for m in spent.keys() {
        if !budgets.contains_key(m) {
            return Err(CertifyError::Recheck(format!(
                "cover monomial {m} is not on the positive side"
            )));
        }
    }
    let mut min = Rational::one();
    for (m, b) in &budgets {
        if let Some(s) = spent.get(m) {
            let left = Rational::one() - s / *b;
            if left < min {
                min = left;
            }
        }
    }
    Ok(min)
}

/// Re-verifies a ledger against `p` from its stored fields alone.
pub fn recheck_ledger(p: &Poly<Rational>, ledger: &DominationLedger) -> Result<(), CertifyError> {
    let fail = |msg: String| Err(CertifyError::Recheck(msg));
    if !ledger.radius.is_positive() || ledger.radius > Rational::one() {
        return fail(format!("radius {} outside (0, 1]", ledger.radius));
    }
    let (pos, err) = split_sides(p);
    let errors: BTreeMap<Monomial, &Rational> = err.iter().map(|(c, m)| (*m, c)).collect();
    if ledger.entries.len() != errors.len() {
        return fail(format!(
            "ledger covers {} error terms, target has {}",
            ledger.entries.len(),
            errors.len()
        ));
    }
    let mut seen = std::collections::BTreeSet::new();
    for entry in &ledger.entries {
        match errors.get(&entry.error) {
            Some(c) if **c == entry.coef => {}
            _ => return fail(format!("entry for {} does not match the target", entry.error)),
        }
        if !seen.insert(entry.error) {
            return fail(format!("error {} covered twice", entry.error));
        }
        let lam = &entry.lambda;
        if !lam.is_positive() || *lam > Rational::one() {
            return fail(format!("weight {lam} outside (0, 1]"));
        }
        if (*lam < Rational::one()) != entry.second.is_some() {
            return fail(format!("weight {lam} inconsistent with cover arity"));
        }
        // e' = λ a₁ + (1−λ) a₂ ≤ e
        for k in 0..4 {
            let mut ek = lam * Rational::from_integer(BigInt::from(entry.first.0[k]));
            if let Some(s) = &entry.second {
                ek += (Rational::one() - lam) * Rational::from_integer(BigInt::from(s.0[k]));
            }
            if ek > Rational::from_integer(BigInt::from(entry.error.0[k])) {
                return fail(format!("cover of {} exceeds it in coordinate {k}", entry.error));
            }
        }
        if exact_slack(&entry.error, &entry.first, entry.second.as_ref(), lam) != entry.slack {
            return fail(format!("slack of {} recorded incorrectly", entry.error));
        }
        if !amgm_holds(entry, &ledger.radius) {
            return fail(format!("AM-GM bound fails for {}", entry.error));
        }
    }
    let min_leftover = leftover(&pos, &ledger.entries)?;
    if !min_leftover.is_positive() || min_leftover != ledger.min_leftover {
        return fail(format!("leftover {min_leftover} does not match or is not positive"));
    }
    if missing_pure_powers(&pos, &ledger.strict_vars) != ledger.missing_pure_powers {
        return fail("pure-power record does not match the target".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn t(c: Rational, i: u32, j: u32, k: u32, l: u32) -> (Rational, Monomial) {
        (c, Monomial::new(i, j, k, l))
    }

    #[test]
    fn single_cover_with_slack() {
        let ledger = dominate(&[t(int(1), 0, 0, 4, 0)], &[t(int(1), 2, 0, 4, 0)], &[]).unwrap();
        assert!(ledger.radius > rat(97, 100) && ledger.radius < int(1));
        assert!(ledger.entries[0].second.is_none());
    }

    #[test]
    fn pair_cover_at_equal_weight() {
        let pos = [t(int(1), 2, 0, 4, 0), t(int(1), 0, 0, 6, 0)];
        let ledger = dominate(&pos, &[t(rat(-1, 10), 1, 0, 5, 0)], &[]).unwrap();
        assert_eq!(ledger.radius, int(1));
        let e = &ledger.entries[0];
        assert_eq!(e.lambda, rat(1, 2));
        assert_eq!(e.slack, int(0));
        // Too large a cross term: 4·1·1 < 2.1².
        assert!(dominate(&pos, &[t(rat(21, 10), 1, 0, 5, 0)], &[]).is_err());
    }

    #[test]
    fn unmatched_monomial_reported() {
        let err = dominate(&[t(int(1), 0, 0, 4, 0)], &[t(int(1), 1, 0, 0, 0)], &[]).unwrap_err();
        assert_eq!(err, CertifyError::Uncovered(Monomial::new(1, 0, 0, 0)));
    }

    #[test]
    fn recheck_accepts_and_rejects() {
        let p = Poly::from_terms([
            (int(1), Monomial::new(2, 0, 0, 0)),
            (int(1), Monomial::new(0, 0, 0, 2)),
            (rat(1, 2), Monomial::new(1, 0, 0, 1)),
            (int(3), Monomial::new(3, 0, 0, 1)),
        ]);
        let ledger = dominate_poly(&p, &[Var::X, Var::V]).unwrap();
        assert!(ledger.is_strict());
        recheck_ledger(&p, &ledger).unwrap();
        let mut bad = ledger.clone();
        bad.radius = int(1);
        if ledger.radius < int(1) {
            assert!(recheck_ledger(&p, &bad).is_err());
        }
        let mut bad = ledger;
        bad.entries[0].beta_first = Rational::zero();
        assert!(recheck_ledger(&p, &bad).is_err());
    }

    #[test]
    fn missing_pure_power_is_not_strict() {
        let p = Poly::from_terms([(int(1), Monomial::new(2, 2, 0, 0))]);
        let ledger = dominate_poly(&p, &[Var::X, Var::Y]).unwrap();
        assert_eq!(ledger.missing_pure_powers, vec![Var::X, Var::Y]);
        assert!(!ledger.is_strict());
    }
}
