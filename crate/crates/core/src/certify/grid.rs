//! Certified grid positivity on a weighted annulus.
//!
//! The annulus `r_in ≤ ρ ≤ r_out`, with `ρ = max(|x|, |y|, |u|^½, |v|^½)`, is
//! covered by boxes of half-widths proportional to `(r, r, r², r²)`. On each box
//! the value at the centre minus a derivative bound (or, when sharper, the
//! monomial-range bound `Σ⁺ b·min m − Σ |c|·max |m|`) bounds `p` from below.
//! Boxes that do not clear zero are bisected along their worst axis.
//!
//! All radii and spacings are dyadic so every box corner is exact in `f64`;
//! evaluation uses `f64` with an explicit a-priori bound on accumulated
//! rounding error, which makes each margin a rigorous lower bound and keeps the
//! computation bit-for-bit reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::poly::{Poly, Var};
use crate::scalar::{f64_to_rational, rational_to_f64, serde_rational, Rational};

/// Result of a successful grid certification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    #[serde(with = "serde_rational")]
    pub inner: Rational,
    #[serde(with = "serde_rational")]
    pub outer: Rational,
    /// Initial spacing relative to the annulus scale.
    #[serde(with = "serde_rational")]
    pub spacing: Rational,
    /// Smallest positive lower bound found over all accepted boxes.
    #[serde(with = "serde_rational")]
    pub margin: Rational,
    /// Largest derivative bound `Σ_v sup|∂_v p|·halfwidth_v` used on an accepted box.
    #[serde(with = "serde_rational")]
    pub derivative_bound: Rational,
    pub boxes: u64,
    pub max_cells: u64,
}

/// Maximum number of halvings of one box along one axis.
pub const MAX_HALVINGS: u8 = 20;

struct Compiled {
    terms: Vec<(f64, [u32; 4])>,
    max_exp: [usize; 4],
    /// `u` times the number of rounding steps per evaluation, doubled.
    rounding: f64,
    even_axes: [bool; 4],
}

impl Compiled {
    fn new(p: &Poly<Rational>) -> Self {
        let terms: Vec<(f64, [u32; 4])> = p.iter().map(|(m, c)| (rational_to_f64(c), m.0)).collect();
        let mut max_exp = [0usize; 4];
        for (_, e) in &terms {
            for k in 0..4 {
                max_exp[k] = max_exp[k].max(e[k] as usize);
            }
        }
        let deg: usize = max_exp.iter().sum();
        let steps = (deg + terms.len() + 16) as f64;
        let even_axes = std::array::from_fn(|k| p.iter().all(|(m, _)| m.0[k] % 2 == 0));
        Compiled {
            terms,
            max_exp,
            rounding: 2.0 * steps * f64::EPSILON,
            even_axes,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    center: [f64; 4],
    half: [f64; 4],
    splits: [u8; 4],
}

struct CellBound {
    margin: f64,
    derivative: f64,
    /// Per-axis contributions `sup|∂_v p|·half_v`.
    axis: [f64; 4],
}

fn powers(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    for k in 1..=n {
        out.push(out[k - 1] * x);
    }
    out
}

fn bound_cell(c: &Compiled, cell: &Cell) -> CellBound {
    let pc: [Vec<f64>; 4] = std::array::from_fn(|k| powers(cell.center[k], c.max_exp[k]));
    let hi: [f64; 4] = std::array::from_fn(|k| cell.center[k].abs() + cell.half[k]);
    let lo: [f64; 4] = std::array::from_fn(|k| (cell.center[k].abs() - cell.half[k]).max(0.0));
    let ph: [Vec<f64>; 4] = std::array::from_fn(|k| powers(hi[k], c.max_exp[k]));
    let pl: [Vec<f64>; 4] = std::array::from_fn(|k| powers(lo[k], c.max_exp[k]));

    let mut value = 0.0;
    let mut abs_sum = 0.0;
    let mut axis = [0.0f64; 4];
    let mut range_pos = 0.0;
    let mut range_neg = 0.0;
    for (coef, e) in &c.terms {
        let t = coef * pc[0][e[0] as usize] * pc[1][e[1] as usize] * pc[2][e[2] as usize] * pc[3][e[3] as usize];
        value += t;
        abs_sum += t.abs();
        let mags: [f64; 4] = std::array::from_fn(|k| ph[k][e[k] as usize]);
        for v in 0..4 {
            if e[v] == 0 {
                continue;
            }
            let mut g = coef.abs() * e[v] as f64 * ph[v][e[v] as usize - 1];
            for w in 0..4 {
                if w != v {
                    g *= mags[w];
                }
            }
            axis[v] += g;
        }
        let max_abs = coef.abs() * mags[0] * mags[1] * mags[2] * mags[3];
        if *coef > 0.0 && e.iter().all(|x| x % 2 == 0) {
            range_pos += coef * pl[0][e[0] as usize] * pl[1][e[1] as usize] * pl[2][e[2] as usize] * pl[3][e[3] as usize];
        } else {
            range_neg += max_abs;
        }
    }
    for v in 0..4 {
        axis[v] *= cell.half[v];
    }
    let derivative: f64 = axis.iter().sum();
    let slop = c.rounding * (abs_sum + derivative + range_pos + range_neg);
    let lipschitz = value - derivative;
    let range = range_pos - range_neg;
    CellBound {
        margin: lipschitz.max(range) - slop,
        derivative,
        axis,
    }
}

fn split(cell: &Cell, axis: usize) -> [Cell; 2] {
    let h = cell.half[axis] / 2.0;
    let mut a = *cell;
    a.half[axis] = h;
    a.splits[axis] += 1;
    let mut b = a;
    a.center[axis] -= h;
    b.center[axis] += h;
    [a, b]
}

/// Axis scale: `r` for x, y and `r²` for u, v.
fn scale(r: f64, v: usize) -> f64 {
    if Var::ALL[v].weight() == 2 {
        r * r
    } else {
        r
    }
}

fn inside_inner(cell: &Cell, r_in: f64) -> bool {
    (0..4).all(|v| cell.center[v].abs() + cell.half[v] <= scale(r_in, v))
}

fn check_dyadic(q: &Rational) -> Result<f64, CertifyError> {
    let d = q.denom();
    let is_pow2 = d.trailing_zeros() == Some(d.bits() - 1);
    if !is_pow2 || q.numer().bits() > 52 || d.bits() > 1000 || *q <= Rational::from_integer(0.into()) {
        return Err(CertifyError::BadRadius(q.clone()));
    }
    Ok(rational_to_f64(q))
}

/// Certifies `p > 0` on the closed annulus `inner ≤ ρ ≤ outer` starting from
/// spacing `spacing` (a power of ½) and refining failing boxes, evaluating at
/// most `max_cells` boxes in total.
pub fn certify_grid(
    p: &Poly<Rational>,
    inner: &Rational,
    outer: &Rational,
    spacing: &Rational,
    max_cells: u64,
) -> Result<GridRecord, CertifyError> {
    let r_in = check_dyadic(inner)?;
    let r_out = check_dyadic(outer)?;
    let h = check_dyadic(spacing)?;
    if r_in >= r_out || h > 1.0 {
        return Err(CertifyError::EmptyInterval {
            lo: inner.clone(),
            hi: outer.clone(),
        });
    }
    let c = Compiled::new(p);
    let n = (2.0 / h).round() as i64;

    // Initial boxes; axes on which p is even are folded to the nonnegative half.
    let mut axes: Vec<Vec<(f64, f64)>> = Vec::new();
    for v in 0..4 {
        let s = scale(r_out, v);
        let half = s / n as f64;
        let range: Vec<(f64, f64)> = if c.even_axes[v] {
            (0..n / 2).map(|i| (half * (2 * i + 1) as f64, half)).collect()
        } else {
            (0..n).map(|i| (-s + half * (2 * i + 1) as f64, half)).collect()
        };
        axes.push(range);
    }
    let mut work: Vec<Cell> = Vec::new();
    for a in &axes[0] {
        for b in &axes[1] {
            for cc in &axes[2] {
                for d in &axes[3] {
                    let cell = Cell {
                        center: [a.0, b.0, cc.0, d.0],
                        half: [a.1, b.1, cc.1, d.1],
                        splits: [0; 4],
                    };
                    if !inside_inner(&cell, r_in) {
                        work.push(cell);
                    }
                }
            }
        }
    }

    let mut boxes = 0u64;
    let mut margin = f64::INFINITY;
    let mut derivative = 0.0f64;
    while !work.is_empty() {
        boxes += work.len() as u64;
        if boxes > max_cells {
            return Err(CertifyError::GridFailed {
                inner: inner.clone(),
                outer: outer.clone(),
                spacing: spacing.clone(),
                reason: format!("box budget {max_cells} exhausted"),
            });
        }
        let bounds: Vec<CellBound> = work.par_iter().map(|cell| bound_cell(&c, cell)).collect();
        let mut next = Vec::new();
        for (cell, b) in work.iter().zip(&bounds) {
            if b.margin > 0.0 {
                margin = margin.min(b.margin);
                derivative = derivative.max(b.derivative);
                continue;
            }
            // Split along the axis with the largest derivative contribution
            // among those still allowed to halve.
            let axis = (0..4)
                .filter(|&v| cell.splits[v] < MAX_HALVINGS && cell.half[v] > 0.0)
                .max_by(|&x, &y| b.axis[x].total_cmp(&b.axis[y]));
            let Some(axis) = axis else {
                return Err(CertifyError::GridFailed {
                    inner: inner.clone(),
                    outer: outer.clone(),
                    spacing: spacing.clone(),
                    reason: format!(
                        "box at {:?} stays nonpositive ({:e}) after {MAX_HALVINGS} halvings",
                        cell.center, b.margin
                    ),
                });
            };
            for child in split(cell, axis) {
                if !inside_inner(&child, r_in) {
                    next.push(child);
                }
            }
        }
        work = next;
    }
    if !margin.is_finite() {
        margin = 0.0;
    }
    Ok(GridRecord {
        inner: inner.clone(),
        outer: outer.clone(),
        spacing: spacing.clone(),
        margin: f64_to_rational(margin),
        derivative_bound: f64_to_rational(derivative),
        boxes,
        max_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Monomial;
    use crate::scalar::{int, rat};

    fn sq_sum() -> Poly<Rational> {
        Poly::from_terms([
            (int(1), Monomial::new(2, 0, 0, 0)),
            (int(1), Monomial::new(0, 2, 0, 0)),
            (int(1), Monomial::new(0, 0, 2, 0)),
            (int(1), Monomial::new(0, 0, 0, 2)),
        ])
    }

    #[test]
    fn sum_of_squares_on_unit_annulus() {
        let rec = certify_grid(&sq_sum(), &rat(1, 2), &int(1), &rat(1, 8), 1 << 20).unwrap();
        assert!(rec.margin > int(0));
    }

    #[test]
    fn indefinite_form_fails() {
        let p = Poly::from_terms([
            (int(1), Monomial::new(2, 0, 0, 0)),
            (int(-1), Monomial::new(0, 2, 0, 0)),
        ]);
        assert!(certify_grid(&p, &rat(1, 2), &int(1), &rat(1, 8), 1 << 16).is_err());
    }

    #[test]
    fn deterministic_margin() {
        let p = &sq_sum() + &Poly::mono(rat(1, 3), 1, 0, 1, 0);
        let a = certify_grid(&p, &rat(1, 4), &rat(1, 2), &rat(1, 8), 1 << 20).unwrap();
        let b = certify_grid(&p, &rat(1, 4), &rat(1, 2), &rat(1, 8), 1 << 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_non_dyadic() {
        assert!(matches!(
            certify_grid(&sq_sum(), &rat(1, 3), &int(1), &rat(1, 8), 100),
            Err(CertifyError::BadRadius(_))
        ));
    }
}
