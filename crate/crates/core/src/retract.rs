//! Gradient-flow retraction of sublevel sets `{Φ < ε}` onto `S = {u = v = 0}`.
//!
//! Evaluation is in `f64` on the certified weighted ball
//! `ρ = max(|x|, |y|, |u|^½, |v|^½) ≤ r`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Poly, Var};

pub type Point = [f64; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetractError {
    #[error("point {point:?} has rho = {rho} outside the certified radius {radius}")]
    OutsideBall { point: Point, rho: f64, radius: f64 },
    #[error("no convergence after {steps} steps (distance {distance:e})")]
    MaxSteps { steps: usize, distance: f64, trace: Box<FlowTrace> },
    #[error("step size underflow at distance {distance:e}")]
    Stalled { distance: f64, trace: Box<FlowTrace> },
    #[error("rejection sampling found only {found} of {wanted} points below {eps:e}")]
    Sampling { found: usize, wanted: usize, eps: f64 },
}

/// Weighted radius `max(|x|, |y|, |u|^½, |v|^½)`.
pub fn rho(p: &Point) -> f64 {
    p[0].abs().max(p[1].abs()).max(p[2].abs().sqrt()).max(p[3].abs().sqrt())
}

/// Euclidean distance `√(u² + v²)` to S.
pub fn distance(p: &Point) -> f64 {
    p[2].hypot(p[3])
}

#[derive(Clone, Debug)]
pub struct FlowField {
    pub phi: Poly<f64>,
    grad: [Poly<f64>; 4],
    /// `Φ_uu`, `Φ_vv`.
    curv: [Poly<f64>; 2],
    /// Certified radius.
    pub radius: f64,
}

impl FlowField {
    pub fn new(phi: Poly<f64>, radius: f64) -> Self {
        let grad = Var::ALL.map(|v| phi.diff(v));
        let curv = [grad[2].diff(Var::U), grad[3].diff(Var::V)];
        FlowField { phi, grad, curv, radius }
    }

    pub fn value(&self, p: &Point) -> f64 {
        self.phi.eval(p)
    }

    pub fn gradient(&self, p: &Point) -> Point {
        [0, 1, 2, 3].map(|i| self.grad[i].eval(p))
    }

    /// Descent direction `−G⁻¹∇Φ`, or `None` at a critical point.
    pub fn direction(&self, p: &Point, metric: Metric) -> Option<Point> {
        let g = self.gradient(p);
        match metric {
            Metric::Euclidean => {
                let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
                (norm > 0.0).then(|| g.map(|c| -c / norm))
            }
            Metric::Diagonal => {
                if g.iter().all(|&c| c == 0.0) {
                    return None;
                }
                let mut d = g.map(|c| -c);
                for (i, c) in [(2, &self.curv[0]), (3, &self.curv[1])] {
                    let second = c.eval(p).abs();
                    let secant = if p[i] != 0.0 { (g[i] / p[i]).abs() } else { 0.0 };
                    let sigma = second.max(secant);
                    if sigma > 0.0 {
                        d[i] /= sigma;
                    }
                }
                Some(d)
            }
        }
    }

    fn inside(&self, p: &Point) -> Result<(), RetractError> {
        let r = rho(p);
        if r <= self.radius {
            Ok(())
        } else {
            Err(RetractError::OutsideBall {
                point: *p,
                rho: r,
                radius: self.radius,
            })
        }
    }
}

/// Riemannian metric for the descent direction `−G⁻¹∇Φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `G = I`; direction normalized to unit length.
    Euclidean,
    /// `G = diag(1, 1, σ_u, σ_v)` with `σ_u = max(|Φ_uu|, |Φ_u/u|)`, likewise
    /// for v. Near S this rescales the stiff `v²` and flat `u^{2k}` directions
    /// to comparable contraction rates.
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub metric: Metric,
    /// Initial step length.
    pub h: f64,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            metric: Metric::Diagonal,
            h: 1.0,
            tol: 1e-6,
            max_steps: 20_000,
        }
    }
}

/// Accepted points of a descent run. `samples[0]` is the start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub start: Point,
    pub h: f64,
    pub samples: Vec<Point>,
    pub phi_values: Vec<f64>,
    pub terminal: Point,
    pub distance: f64,
    /// Accepted plus rejected steps.
    pub steps: usize,
    pub converged: bool,
}

impl FlowTrace {
    pub fn strictly_decreasing(&self) -> bool {
        self.phi_values.windows(2).all(|w| w[1] < w[0])
    }
}

/// Descends along `−G⁻¹∇Φ` with step `h`; `h` doubles (up to its initial value)
/// after an accepted step and halves after any step that fails to lower Φ or
/// leaves the ball.
pub fn flow(field: &FlowField, start: Point, cfg: &FlowConfig) -> Result<FlowTrace, RetractError> {
    field.inside(&start)?;
    let mut trace = FlowTrace {
        start,
        h: cfg.h,
        samples: vec![start],
        phi_values: vec![field.value(&start)],
        terminal: start,
        distance: distance(&start),
        steps: 0,
        converged: false,
    };
    let mut p = start;
    let mut value = trace.phi_values[0];
    let mut h = cfg.h;
    loop {
        let d = distance(&p);
        if d < cfg.tol || d == 0.0 {
            trace.converged = true;
            break;
        }
        if trace.steps >= cfg.max_steps {
            trace.terminal = p;
            trace.distance = d;
            return Err(RetractError::MaxSteps {
                steps: trace.steps,
                distance: d,
                trace: Box::new(trace),
            });
        }
        let dir = match field.direction(&p, cfg.metric) {
            Some(dir) if h >= f64::MIN_POSITIVE => dir,
            _ => {
                trace.terminal = p;
                trace.distance = d;
                return Err(RetractError::Stalled {
                    distance: d,
                    trace: Box::new(trace),
                });
            }
        };
        trace.steps += 1;
        let next = [0, 1, 2, 3].map(|i| p[i] + h * dir[i]);
        let next_value = field.value(&next);
        if next_value < value && rho(&next) <= field.radius {
            p = next;
            value = next_value;
            trace.samples.push(p);
            trace.phi_values.push(value);
            h = (2.0 * h).min(cfg.h);
        } else {
            h /= 2.0;
        }
    }
    trace.terminal = p;
    trace.distance = distance(&p);
    Ok(trace)
}

/// Outcome of [`basis_scan`] for one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub eps: f64,
    pub samples: usize,
    /// Draws rejected because `Φ ≥ ε`.
    pub rejected: usize,
    pub converged: usize,
    pub max_distance: f64,
    pub max_steps: usize,
    pub all_decreasing: bool,
    /// Every sample of a smaller level also lies below this one.
    pub nested: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub radius: f64,
    pub seed: u64,
    pub levels: Vec<LevelReport>,
    pub passed: bool,
    /// Trajectories per level, in the order of `levels`.
    #[serde(skip)]
    pub traces: Vec<Vec<FlowTrace>>,
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub eps: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub flow: FlowConfig,
    /// Rejection-sampling draws allowed per wanted sample.
    pub draws_per_sample: usize,
}

/// Uniform sample of the certified box.
pub fn sample_box(rng: &mut impl Rng, radius: f64) -> Point {
    let r2 = radius * radius;
    [
        rng.gen_range(-radius..=radius),
        rng.gen_range(-radius..=radius),
        rng.gen_range(-r2..=r2),
        rng.gen_range(-r2..=r2),
    ]
}

/// Points of the open sublevel set `{Φ < eps}` in the certified box.
pub fn sample_sublevel(field: &FlowField, eps: f64, n: usize, draws_per_sample: usize, seed: u64) -> Result<(Vec<Point>, usize), RetractError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut rejected = 0;
    for _ in 0..n.saturating_mul(draws_per_sample) {
        if out.len() == n {
            break;
        }
        let p = sample_box(&mut rng, field.radius);
        if field.value(&p) < eps {
            out.push(p);
        } else {
            rejected += 1;
        }
    }
    if out.len() < n {
        return Err(RetractError::Sampling {
            found: out.len(),
            wanted: n,
            eps,
        });
    }
    Ok((out, rejected))
}

/// Samples each `Ω_ε = {Φ < ε}`, flows every sample to S, and checks nesting
/// of the sampled sets across levels.
pub fn basis_scan(field: &FlowField, cfg: &ScanConfig) -> Result<ScanReport, RetractError> {
    let mut eps = cfg.eps.clone();
    eps.sort_by(f64::total_cmp);
    let mut levels = Vec::new();
    let mut all_traces = Vec::new();
    let mut smaller: Vec<Point> = Vec::new();
    for (k, &e) in eps.iter().enumerate() {
        let (points, rejected) = sample_sublevel(field, e, cfg.samples, cfg.draws_per_sample, cfg.seed.wrapping_add(k as u64))?;
        let nested = smaller.iter().all(|p| field.value(p) < e);
        let traces: Vec<FlowTrace> = points
            .par_iter()
            .map(|&p| flow(field, p, &cfg.flow))
            .collect::<Result<_, _>>()?;
        levels.push(LevelReport {
            eps: e,
            samples: traces.len(),
            rejected,
            converged: traces.iter().filter(|t| t.converged).count(),
            max_distance: traces.iter().map(|t| t.distance).fold(0.0, f64::max),
            max_steps: traces.iter().map(|t| t.steps).max().unwrap_or(0),
            all_decreasing: traces.iter().all(FlowTrace::strictly_decreasing),
            nested,
        });
        smaller.extend(points);
        all_traces.push(traces);
    }
    let passed = levels
        .iter()
        .all(|l| l.converged == l.samples && l.all_decreasing && l.nested);
    Ok(ScanReport {
        radius: field.radius,
        seed: cfg.seed,
        levels,
        passed,
        traces: all_traces,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialReport {
    pub lines: usize,
    pub grid: usize,
    pub failures: usize,
    /// First failing line, if any.
    pub first_failure: Option<Point>,
    pub passed: bool,
}

/// Checks that `t ↦ Φ(x, y, tu, tv)` is strictly increasing on a uniform grid of
/// `[0, 1]` for `lines` random endpoints off S in the certified box.
pub fn radial_line_check(field: &FlowField, lines: usize, grid: usize, seed: u64) -> RadialReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ends: Vec<Point> = (0..lines)
        .map(|_| loop {
            let p = sample_box(&mut rng, field.radius);
            if distance(&p) > 0.0 {
                break p;
            }
        })
        .collect();
    let bad: Vec<Point> = ends
        .par_iter()
        .filter(|p| {
            let vals: Vec<f64> = (0..=grid)
                .map(|k| {
                    let t = k as f64 / grid as f64;
                    field.value(&[p[0], p[1], t * p[2], t * p[3]])
                })
                .collect();
            !vals.windows(2).all(|w| w[1] > w[0])
        })
        .copied()
        .collect();
    RadialReport {
        lines,
        grid,
        failures: bad.len(),
        first_failure: bad.first().copied(),
        passed: bad.is_empty(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::build_phi;
    use crate::scalar::{int, rat};

    fn field() -> FlowField {
        let sol = build_phi(&rat(1, 4), &int(1)).unwrap();
        FlowField::new(sol.phi().to_f64(), 0.25)
    }

    #[test]
    fn start_on_surface_is_fixed() {
        let t = flow(&field(), [0.1, -0.05, 0.0, 0.0], &FlowConfig::default()).unwrap();
        assert!(t.converged && t.distance == 0.0 && t.samples.len() == 1);
    }

    #[test]
    fn converges_from_documented_start() {
        let f = field();
        let t = flow(&f, [0.05, 0.05, 0.01, 0.01], &FlowConfig::default()).unwrap();
        assert!(t.converged && t.distance < 1e-6 && t.strictly_decreasing(), "{}", t.distance);
        let flipped = flow(&f, [0.05, 0.05, -0.01, 0.01], &FlowConfig::default()).unwrap();
        assert!(flipped.converged && flipped.distance < 1e-6);
    }

    #[test]
    fn euclidean_descent_stalls_in_the_valley() {
        let cfg = FlowConfig {
            metric: Metric::Euclidean,
            h: 1e-3,
            max_steps: 2_000,
            ..FlowConfig::default()
        };
        let err = flow(&field(), [0.05, 0.05, 0.01, 0.01], &cfg).unwrap_err();
        assert!(matches!(err, RetractError::MaxSteps { distance, .. } if distance > 1e-3));
    }

    #[test]
    fn phi_is_not_even_in_u() {
        let f = field();
        let (p, q) = ([0.2, 0.1, 0.02, 0.0], [0.2, 0.1, -0.02, 0.0]);
        assert!(f.value(&p) != f.value(&q));
    }

    #[test]
    fn rejects_start_outside_ball() {
        let err = flow(&field(), [0.3, 0.0, 0.0, 0.0], &FlowConfig::default()).unwrap_err();
        assert!(matches!(err, RetractError::OutsideBall { .. }));
    }

    #[test]
    fn budget_exhaustion_reports_trace() {
        let cfg = FlowConfig {
            max_steps: 3,
            ..FlowConfig::default()
        };
        match flow(&field(), [0.05, 0.05, 0.01, 0.01], &cfg) {
            Err(RetractError::MaxSteps { trace, .. }) => assert!(trace.strictly_decreasing()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn distance_shrinks_with_budget() {
        let f = field();
        let start = [0.05, 0.05, 0.01, 0.01];
        let mut last = f64::INFINITY;
        for budget in [5, 10, 20, 40, 80] {
            let cfg = FlowConfig {
                max_steps: budget,
                ..FlowConfig::default()
            };
            let d = match flow(&f, start, &cfg) {
                Ok(t) => t.distance,
                Err(RetractError::MaxSteps { distance, .. }) => distance,
                Err(e) => panic!("{e}"),
            };
            assert!(d <= last, "budget {budget}: {d} > {last}");
            last = d;
        }
    }

    #[test]
    fn sublevel_excludes_the_level_itself() {
        let f = field();
        let p = [0.1, 0.1, 0.001, 0.002];
        let v = f.value(&p);
        let (pts, _) = sample_sublevel(&f, v, 20, 10_000, 5).unwrap();
        assert!(pts.iter().all(|q| f.value(q) < v));
    }

    #[test]
    fn small_scan_and_radial_lines() {
        let f = field();
        let cfg = ScanConfig {
            eps: vec![1e-3, 1e-4],
            samples: 40,
            seed: 11,
            flow: FlowConfig::default(),
            draws_per_sample: 10_000,
        };
        let r = basis_scan(&f, &cfg).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.levels[0].eps, 1e-4);
        assert!(radial_line_check(&f, 100, 64, 3).passed);
    }
}
