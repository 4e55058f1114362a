//! Unions of two totally real planes `M(B) = ℝ² ∪ A(B)` and the holomorphic
//! maps Ψ carrying them onto the quadratic model surfaces
//! `w = ½αzz̄ + ¼z² + ¼z̄²`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::{build_phi, CoeffSolution, FeasibilityError};
use crate::poly::{Monomial, Poly, Var};
use crate::real::{cabs, log10_abs, sqrt, to_f64, ComplexReal, Precision, Real};
use crate::scalar::{format_rational, int, serde_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanesError {
    #[error("B - iI is singular (det(B^2 + I) = 0)")]
    Singular,
    #[error("trace-zero B is nilpotent and nonzero, hence not diagonalizable")]
    NotDiagonalizable,
    #[error("{0}")]
    OutOfScope(String),
    #[error("precision {0} digits is below the 30-digit minimum")]
    PrecisionTooLow(u32),
    #[error("sample count must be positive")]
    NoSamples,
    #[error("no correction N up to {0} clears the gradient check")]
    Budget(String),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
}

/// Which of the two explicit maps applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneKind {
    /// `B ~ diag(μ, −μ)`.
    Hyperbolic,
    /// `B ~ [[0, μ], [−μ, 0]]`.
    Elliptic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class", content = "reason")]
pub enum Classification {
    /// Trace zero, real eigenvalues `±μ`: the quadratic-model construction applies.
    Hyperbolic,
    /// Rotation type with `det B > 1`: not polynomially convex (Weinstock).
    NonPolynomiallyConvex,
    /// Rotation type with `det B < 1`, or `trace B ≠ 0`.
    OutOfScope(String),
}

/// `M(B)` together with its normal form. `mu2 = μ²` is exact; μ itself may be
/// irrational.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneUnion {
    #[serde(with = "matrix_serde")]
    pub b: [[Rational; 2]; 2],
    pub kind: Option<PlaneKind>,
    #[serde(with = "serde_rational")]
    pub mu2: Rational,
    pub classification: Classification,
}

mod matrix_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(b: &[[Rational; 2]; 2], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = b.iter().map(|r| r.iter().map(format_rational).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[[Rational; 2]; 2], D::Error> {
        let rows = <[[String; 2]; 2]>::deserialize(d)?;
        let p = |s: &String| parse_rational(s).map_err(serde::de::Error::custom);
        Ok([[p(&rows[0][0])?, p(&rows[0][1])?], [p(&rows[1][0])?, p(&rows[1][1])?]])
    }
}

/// Classifies `M(B)` up to real conjugacy.
pub fn normalize(b: [[Rational; 2]; 2]) -> Result<PlaneUnion, PlanesError> {
    let trace = &b[0][0] + &b[1][1];
    let det = &b[0][0] * &b[1][1] - &b[0][1] * &b[1][0];
    // B² + I = trace·B + (1 − det)·I when expanded by Cayley–Hamilton.
    let b2i = [
        [&trace * &b[0][0] + int(1) - &det, &trace * &b[0][1]],
        [&trace * &b[1][0], &trace * &b[1][1] + int(1) - &det],
    ];
    if &b2i[0][0] * &b2i[1][1] - &b2i[0][1] * &b2i[1][0] == Rational::zero() {
        return Err(PlanesError::Singular);
    }
    if !trace.is_zero() {
        return Ok(PlaneUnion {
            b,
            kind: None,
            mu2: Rational::zero(),
            classification: Classification::OutOfScope("trace B is nonzero".into()),
        });
    }
    let (kind, mu2, classification) = if det.is_negative() {
        (PlaneKind::Hyperbolic, -det, Classification::Hyperbolic)
    } else if det.is_zero() {
        if b.iter().flatten().any(|e| !e.is_zero()) {
            return Err(PlanesError::NotDiagonalizable);
        }
        (PlaneKind::Hyperbolic, det, Classification::Hyperbolic)
    } else if det > int(1) {
        (PlaneKind::Elliptic, det, Classification::NonPolynomiallyConvex)
    } else {
        (
            PlaneKind::Elliptic,
            det,
            Classification::OutOfScope("rotation type with det B < 1 is outside both constructions".into()),
        )
    };
    Ok(PlaneUnion {
        b,
        kind: Some(kind),
        mu2,
        classification,
    })
}

impl PlaneUnion {
    /// `B = diag(μ, −μ)`.
    pub fn hyperbolic(mu: &Rational) -> Result<Self, PlanesError> {
        normalize([[mu.clone(), int(0)], [int(0), -mu.clone()]])
    }

    /// `B = [[0, μ], [−μ, 0]]`.
    pub fn elliptic(mu: &Rational) -> Result<Self, PlanesError> {
        normalize([[int(0), mu.clone()], [-mu.clone(), int(0)]])
    }

    fn kind_or_err(&self) -> Result<PlaneKind, PlanesError> {
        self.kind
            .ok_or_else(|| PlanesError::OutOfScope("no normal form for trace B != 0".into()))
    }

    /// Angles of the map Ψ at precision `p`.
    pub fn angles(&self, p: &Precision) -> Result<Angles, PlanesError> {
        let kind = self.kind_or_err()?;
        let mu2 = p.rational(&self.mu2);
        let one = p.int(1);
        let (sin, cos) = match kind {
            PlaneKind::Hyperbolic => {
                let s = &one / &sqrt(&(&one + &mu2));
                (s.clone(), &sqrt(&mu2) * &s)
            }
            PlaneKind::Elliptic => {
                if self.mu2 <= int(1) {
                    return Err(PlanesError::OutOfScope("elliptic map needs mu > 1".into()));
                }
                let s = &one / &sqrt(&mu2);
                let c = sqrt(&(&one - &(&s * &s)));
                (s, c)
            }
        };
        let two = p.int(2);
        let half = ComplexReal::new(sqrt(&(&(&one + &cos) / &two)), sqrt(&(&(&one - &cos) / &two)));
        let alpha = match kind {
            PlaneKind::Hyperbolic => cos.clone(),
            PlaneKind::Elliptic => &one / &cos,
        };
        let second = match kind {
            PlaneKind::Hyperbolic => -(&sin * &sin),
            PlaneKind::Elliptic => &(&sin * &sin) / &(&cos * &two),
        };
        Ok(Angles {
            kind,
            mu: sqrt(&mu2),
            sin,
            cos,
            half,
            alpha,
            second,
        })
    }

    /// `α² = cos²θ` (hyperbolic) or `1/cos²θ` (elliptic), exactly.
    pub fn alpha_squared(&self) -> Result<Rational, PlanesError> {
        Ok(match self.kind_or_err()? {
            PlaneKind::Hyperbolic => &self.mu2 / (&self.mu2 + int(1)),
            PlaneKind::Elliptic => &self.mu2 / (&self.mu2 - int(1)),
        })
    }

    /// Conjugator `P` with `B = P·diag(μ, −μ)·P⁻¹` for the hyperbolic class.
    pub fn conjugator(&self, p: &Precision) -> Option<[[Real; 2]; 2]> {
        if self.classification != Classification::Hyperbolic {
            return None;
        }
        let [[a, b], [c, _]] = &self.b;
        let mu = sqrt(&p.rational(&self.mu2));
        let (ar, br, cr) = (p.rational(a), p.rational(b), p.rational(c));
        let col = |lambda: &Real| -> [Real; 2] {
            if !b.is_zero() {
                [br.clone(), lambda - &ar]
            } else if c.is_zero() {
                // Diagonal B: standard basis, ordered by eigenvalue.
                if (lambda >= &p.zero()) == !a.is_negative() {
                    [p.int(1), p.zero()]
                } else {
                    [p.zero(), p.int(1)]
                }
            } else if (lambda - &ar).is_zero() {
                [&ar * &p.int(2), cr.clone()]
            } else {
                [p.zero(), p.int(1)]
            }
        };
        let plus = col(&mu);
        let minus = col(&-mu.clone());
        Some([[plus[0].clone(), minus[0].clone()], [plus[1].clone(), minus[1].clone()]])
    }
}

/// Constants of Ψ at a fixed precision.
#[derive(Clone, Debug)]
pub struct Angles {
    pub kind: PlaneKind,
    pub mu: Real,
    pub sin: Real,
    pub cos: Real,
    /// `e^{iθ/2}`.
    pub half: ComplexReal,
    /// `cos θ` (hyperbolic) or `1/cos θ` (elliptic).
    pub alpha: Real,
    /// `−sin²θ` (hyperbolic) or `½ tan θ sin θ` (elliptic).
    pub second: Real,
}

impl Angles {
    /// `Ψ(z, w)`.
    pub fn psi(&self, z: &ComplexReal, w: &ComplexReal) -> [ComplexReal; 2] {
        let i = ComplexReal::new(Real::zero(), Real::one());
        let first = i.clone() * self.half.conj() * z.clone() + i * self.half.clone() * w.clone();
        let second = match self.kind {
            PlaneKind::Hyperbolic => z.clone() * w.clone(),
            PlaneKind::Elliptic => z.clone() * z.clone() + w.clone() * w.clone(),
        }
        .scale(self.second.clone());
        [first, second]
    }

    /// `DΨ(z, w)` as rows `(∂Ψ_j/∂z, ∂Ψ_j/∂w)`.
    pub fn dpsi(&self, z: &ComplexReal, w: &ComplexReal) -> [[ComplexReal; 2]; 2] {
        let i = ComplexReal::new(Real::zero(), Real::one());
        let first = [i.clone() * self.half.conj(), i * self.half.clone()];
        let second = match self.kind {
            PlaneKind::Hyperbolic => [w.scale(self.second.clone()), z.scale(self.second.clone())],
            PlaneKind::Elliptic => {
                let two = &self.second + &self.second;
                [z.scale(two.clone()), w.scale(two)]
            }
        };
        [first, second]
    }

    /// Point of the plane `which` (0: ℝ², 1: A(B) in normal form) at real
    /// coordinates `(x, y)`.
    pub fn plane_point(&self, which: usize, x: &Real, y: &Real) -> [ComplexReal; 2] {
        let zero = Real::zero();
        if which == 0 {
            return [ComplexReal::new(x.clone(), zero.clone()), ComplexReal::new(y.clone(), zero)];
        }
        match self.kind {
            // x(μ + i, 0) + y(0, i − μ).
            PlaneKind::Hyperbolic => [
                ComplexReal::new(x * &self.mu, x.clone()),
                ComplexReal::new(-(y * &self.mu), y.clone()),
            ],
            // x(i, −μ) + y(μ, i).
            PlaneKind::Elliptic => [
                ComplexReal::new(y * &self.mu, x.clone()),
                ComplexReal::new(-(x * &self.mu), y.clone()),
            ],
        }
    }

    /// `w − ½α|z|² − ½Re z²` for a point `(z, w)`.
    pub fn model_residual(&self, z: &ComplexReal, w: &ComplexReal) -> ComplexReal {
        let re_z2 = &(&z.re * &z.re) - &(&z.im * &z.im);
        let twice = &(&self.alpha * &z.norm_sqr()) + &re_z2;
        let target = &twice / &Real::from(2u8);
        ComplexReal::new(&w.re - &target, w.im.clone())
    }
}

/// Outcome of [`verify_psi_image`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub kind: PlaneKind,
    #[serde(with = "serde_rational")]
    pub mu2: Rational,
    pub digits: u32,
    pub samples: usize,
    /// `log₁₀` of the largest residual over both planes.
    pub log10_residual: f64,
    /// `3 − digits`.
    pub log10_tolerance: f64,
    pub passed: bool,
}

/// Samples both planes at `(x, y) ∈ [−1, 1]²`, maps them through Ψ at `digits`
/// precision, and records the largest `|w − ½αzz̄ − ¼z² − ¼z̄²|`.
pub fn verify_psi_image(pu: &PlaneUnion, samples: usize, digits: u32, seed: u64) -> Result<ImageReport, PlanesError> {
    if digits < 30 {
        return Err(PlanesError::PrecisionTooLow(digits));
    }
    if samples == 0 {
        return Err(PlanesError::NoSamples);
    }
    let p = Precision::digits(digits);
    let ang = pu.angles(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> = (0..samples)
        .map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
        .collect();
    let worst = coords
        .par_iter()
        .map(|&(x, y)| {
            let (x, y) = (p.f64(x), p.f64(y));
            (0..2)
                .map(|which| {
                    let [z, w] = ang.plane_point(which, &x, &y);
                    let [zi, wi] = ang.psi(&z, &w);
                    log10_abs(&cabs(&ang.model_residual(&zi, &wi)))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let tol = 3.0 - f64::from(digits);
    Ok(ImageReport {
        kind: ang.kind,
        mu2: pu.mu2.clone(),
        digits,
        samples,
        log10_residual: worst,
        log10_tolerance: tol,
        passed: worst <= tol,
    })
}

/// Best rational approximation of `√q` with denominator at most `max_den`;
/// exact when `q` is the square of a rational.
pub fn rational_sqrt(q: &Rational, max_den: u64) -> (Rational, bool) {
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        return (Rational::new(rn, rd), true);
    }
    // √q ≈ a/2^K, then continued-fraction convergents of that dyadic.
    const K: usize = 96;
    let a = (n * (BigInt::one() << (2 * K)) / d).sqrt();
    let mut num = a;
    let mut den = BigInt::one() << K;
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let bound = BigInt::from(max_den);
    while !den.is_zero() {
        let t = &num / &den;
        let p2 = &t * &p1 + &p0;
        let q2 = &t * &q1 + &q0;
        if q2 > bound {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let r = &num - &t * &den;
        num = den;
        den = r;
    }
    (Rational::new(p1, q1), false)
}

/// Largest denominator used when cos θ is irrational.
pub const ALPHA_DENOMINATOR: u64 = 1 << 20;

/// `Φ̃ = Φ_N ∘ (model coordinates) ∘ Ψ` for the hyperbolic class, where
/// `Φ_N = Φ + N(x² + y²)u^{2n}` and Φ is built at a rational `α_q ≈ cos θ`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub union: PlaneUnion,
    pub alpha_q: Rational,
    pub alpha_exact: bool,
    pub solution: CoeffSolution,
    pub n_corr: Rational,
    /// `2n`: the `u`-degree of the homogeneous part of Φ.
    pub degree: u32,
    pub phi_n: Poly<Rational>,
    precision: Precision,
    angles: Angles,
    alpha_r: Real,
    phi_r: Poly<Real>,
    grad_r: [Poly<Real>; 4],
}

impl Pullback {
    pub fn new(pu: &PlaneUnion, n_corr: &Rational, digits: u32) -> Result<Self, PlanesError> {
        let solution = Self::solve(pu)?;
        Self::with_solution(pu, solution, n_corr, digits)
    }

    fn solve(pu: &PlaneUnion) -> Result<CoeffSolution, PlanesError> {
        if pu.classification != Classification::Hyperbolic {
            return Err(PlanesError::OutOfScope(format!(
                "pullback needs the hyperbolic class, got {:?}",
                pu.classification
            )));
        }
        let (alpha_q, _) = rational_sqrt(&pu.alpha_squared()?, ALPHA_DENOMINATOR);
        Ok(build_phi(&alpha_q, &int(1))?)
    }

    fn with_solution(pu: &PlaneUnion, solution: CoeffSolution, n_corr: &Rational, digits: u32) -> Result<Self, PlanesError> {
        let (alpha_q, alpha_exact) = rational_sqrt(&pu.alpha_squared()?, ALPHA_DENOMINATOR);
        let degree = solution.phi().max_exponent(Var::U);
        let corr = Poly::from_terms([
            (n_corr.clone(), Monomial::new(2, 0, degree, 0)),
            (n_corr.clone(), Monomial::new(0, 2, degree, 0)),
        ]);
        let phi_n = solution.phi() + &corr;
        let precision = Precision::digits(digits);
        let angles = pu.angles(&precision)?;
        let phi_r = phi_n.map(|q| precision.rational(q));
        let grad_r = Var::ALL.map(|v| phi_r.diff(v));
        Ok(Pullback {
            union: pu.clone(),
            alpha_r: precision.rational(&alpha_q),
            alpha_q,
            alpha_exact,
            solution,
            n_corr: n_corr.clone(),
            degree,
            phi_n,
            precision,
            angles,
            phi_r,
            grad_r,
        })
    }

    pub fn angles(&self) -> &Angles {
        &self.angles
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// `(x, y, u, v)` of `Ψ(z, w)` for the model at `α_q`.
    fn model_point(&self, z: &ComplexReal, w: &ComplexReal) -> ([Real; 4], ComplexReal) {
        let [zi, wi] = self.angles.psi(z, w);
        let re_z2 = &(&zi.re * &zi.re) - &(&zi.im * &zi.im);
        let half = self.precision.rational(&Rational::new(1.into(), 2.into()));
        let u = &wi.re - &(&(&(&self.alpha_r * &zi.norm_sqr()) + &re_z2) * &half);
        ([zi.re.clone(), zi.im.clone(), u, wi.im.clone()], zi)
    }

    pub fn value(&self, z: &ComplexReal, w: &ComplexReal) -> Real {
        self.phi_r.eval(&self.model_point(z, w).0)
    }

    /// `(∂Φ̃/∂z, ∂Φ̃/∂w)` by the holomorphic chain rule.
    pub fn wirtinger(&self, z: &ComplexReal, w: &ComplexReal) -> [ComplexReal; 2] {
        let (pt, zi) = self.model_point(z, w);
        let [fx, fy, fu, fv] = self.grad_r.clone().map(|g| g.eval(&pt));
        let half = self.precision.rational(&Rational::new(1.into(), 2.into()));
        // ∂u/∂z = −½(α z̄ + z).
        let du_dz = (zi.conj().scale(self.alpha_r.clone()) + zi).scale(-half.clone());
        let d_z = ComplexReal::new(&fx * &half, -(&fy * &half)) + du_dz.scale(fu.clone());
        let d_w = ComplexReal::new(&fu * &half, -(&fv * &half));
        let [[a, b], [c, d]] = self.angles.dpsi(z, w);
        [a * d_z.clone() + c * d_w.clone(), b * d_z + d * d_w]
    }

    /// Euclidean norm of the real gradient: `2·|(∂Φ̃/∂z, ∂Φ̃/∂w)|`.
    pub fn grad_norm(&self, z: &ComplexReal, w: &ComplexReal) -> Real {
        let [a, b] = self.wirtinger(z, w);
        let n = sqrt(&(&a.norm_sqr() + &b.norm_sqr()));
        &n + &n
    }
}

/// Radii at which the critical line `z = e^{iθ}w` is sampled.
pub const GRADIENT_RADII: [f64; 3] = [1e-3, 1e-2, 1e-1];
/// Relative threshold: `|∇Φ̃|·r ≥ η·Φ̃` on the critical line.
pub const GRADIENT_ETA: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    #[serde(with = "serde_rational")]
    pub n_corr: Rational,
    #[serde(with = "serde_rational")]
    pub alpha_q: Rational,
    pub alpha_exact: bool,
    pub samples: usize,
    /// Smallest `|∇Φ̃|·r/Φ̃` on the critical line.
    pub min_relative_gradient: f64,
    /// Smallest `|∇Φ̃|/r⁴` on the critical line.
    pub min_gradient_over_r4: f64,
    /// Smallest `Φ̃` on the critical line (must be positive).
    pub min_value: f64,
    /// `log₁₀` of the largest `|DΨ·(e^{iθ/2}, −e^{−iθ/2})|` on the critical line.
    pub log10_kernel_residual: f64,
    /// Smallest `|det DΨ| / |z − e^{iθ}w|` at generic points.
    pub min_det_ratio: f64,
    pub passed: bool,
}

/// Samples the critical line of Ψ and checks that `Φ̃` has no critical points
/// there, that the kernel formula holds and that `DΨ` is invertible elsewhere.
pub fn check_pullback_gradient(pb: &Pullback, samples: usize, seed: u64) -> GradientReport {
    let ang = pb.angles();
    let p = pb.precision();
    let e_theta = ang.half.clone() * ang.half.clone();
    let kernel = [ang.half.clone(), -ang.half.conj()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(f64, f64, f64, f64)> = (0..samples.max(1))
        .map(|k| {
            let r = GRADIENT_RADII[k % GRADIENT_RADII.len()];
            (r, rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let rows: Vec<(f64, f64, f64, f64, f64)> = jobs
        .par_iter()
        .map(|&(r, phase, off, phase2)| {
            let w = ComplexReal::new(p.f64(r * phase.cos()), p.f64(r * phase.sin()));
            let z = e_theta.clone() * w.clone();
            let val = pb.value(&z, &w);
            let g = pb.grad_norm(&z, &w);
            let rel = to_f64(&(&(&g * &p.f64(r)) / &val));
            let over_r4 = to_f64(&(&g / &p.f64(r.powi(4))));
            let d = ang.dpsi(&z, &w);
            let kv0 = d[0][0].clone() * kernel[0].clone() + d[0][1].clone() * kernel[1].clone();
            let kv1 = d[1][0].clone() * kernel[0].clone() + d[1][1].clone() * kernel[1].clone();
            let kres = log10_abs(&cabs(&kv0)).max(log10_abs(&cabs(&kv1)));
            // A generic point off the critical line.
            let z2 = z.clone() + ComplexReal::new(p.f64(off * r * phase2.cos()), p.f64(off * r * phase2.sin()));
            let d2 = ang.dpsi(&z2, &w);
            let det = d2[0][0].clone() * d2[1][1].clone() - d2[0][1].clone() * d2[1][0].clone();
            let gap = cabs(&(z2 - e_theta.clone() * w));
            let det_ratio = to_f64(&(&cabs(&det) / &gap));
            (rel, over_r4, to_f64(&val), kres, det_ratio)
        })
        .collect();
    let min = |f: fn(&(f64, f64, f64, f64, f64)) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    let min_rel = min(|r| r.0);
    let min_r4 = min(|r| r.1);
    let min_val = min(|r| r.2);
    let min_det = min(|r| r.4);
    let kres = rows.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    let passed = min_rel >= GRADIENT_ETA
        && min_val > 0.0
        && kres <= 3.0 - f64::from(p.digits)
        && min_det > 0.0;
    GradientReport {
        n_corr: pb.n_corr.clone(),
        alpha_q: pb.alpha_q.clone(),
        alpha_exact: pb.alpha_exact,
        samples: rows.len(),
        min_relative_gradient: min_rel,
        min_gradient_over_r4: min_r4,
        min_value: min_val,
        log10_kernel_residual: kres,
        min_det_ratio: min_det,
        passed,
    }
}

/// Correction weight `N`: fixed, or found by doubling from 0 (then 1, 2, 4, …).
#[derive(Clone, Debug, PartialEq)]
pub enum CorrectionChoice {
    Fixed(Rational),
    Auto,
}

/// Builds `Φ̃` and runs the gradient check, searching `N` when asked.
pub fn pullback_phi(
    pu: &PlaneUnion,
    n: &CorrectionChoice,
    digits: u32,
    samples: usize,
    seed: u64,
) -> Result<(Pullback, GradientReport), PlanesError> {
    let solution = Pullback::solve(pu)?;
    let candidates: Vec<Rational> = match n {
        CorrectionChoice::Fixed(q) => vec![q.clone()],
        CorrectionChoice::Auto => std::iter::once(Rational::zero())
            .chain((0..20).map(|k| Rational::from_integer(BigInt::one() << k)))
            .collect(),
    };
    let mut last = None;
    for n_corr in candidates {
        let pb = Pullback::with_solution(pu, solution.clone(), &n_corr, digits)?;
        let report = check_pullback_gradient(&pb, samples, seed);
        if report.passed {
            return Ok((pb, report));
        }
        last = Some((pb, report));
    }
    match (n, last) {
        (CorrectionChoice::Fixed(_), Some(pair)) => Ok(pair),
        (_, Some((pb, _))) => Err(PlanesError::Budget(format_rational(&pb.n_corr))),
        _ => unreachable!("at least one candidate"),
    }
}
