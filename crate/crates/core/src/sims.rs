//! Heuristic diagnostics for the Sims classification at the singular end.
//!
//! The numerical-range set `Q` (closure of `q/w + r p`, `r > 0`) is sampled
//! and hulled; a rotation `η` and a nearest point `K` then separate a test
//! point `λ₀` from `Q`. Case I/II/III is probed by watching whether the
//! weighted `L²` integral and the Sims form integral of two independent
//! solutions keep growing as the truncation point moves out. Finite sampling
//! cannot prove anything about the singular end; the verdicts are hints.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{self, cumulative_gauss, Coefficients, OdeError, SlState, Tolerances, Trajectory};
use crate::problem::{left_init, Problem};
use crate::scaled::ScaledComplex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimsError {
    #[error("empty sampling grid")]
    EmptyGrid,
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("λ₀ = {0} lies inside the numerical range")]
    InsideNumericalRange(Complex64),
    #[error("λ = {0} is not in the half-plane Re[(λ-K)e^(iη)] <= 0")]
    OutsideHalfPlane(Complex64),
    #[error("case diagnostic needs at least 3 schedule points, got {0}")]
    ScheduleTooShort(usize),
}

/// Sampled numerical-range set and its convex hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericalRangeHull {
    pub samples: Vec<Complex64>,
    /// Counterclockwise; one or two points when the samples are collinear.
    pub vertices: Vec<Complex64>,
    /// Extreme arguments of `p(x)`: `Q` is unbounded along these directions.
    pub ray_directions: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
}

/// `count` values spaced evenly in log between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[count - 1] = hi;
    grid
}

pub fn default_r_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 40)
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull by Andrew's monotone chain, counterclockwise, collinear points dropped.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Samples `q(x)/w(x) + r p(x)` over `x_points` points of `[a, max b_n]` and the `r` grid.
pub fn sample_hull(problem: &Problem, x_points: usize, r_grid: &[f64]) -> Result<NumericalRangeHull, SimsError> {
    if x_points == 0 || r_grid.is_empty() {
        return Err(SimsError::EmptyGrid);
    }
    let (a, b) = (problem.a, problem.max_bn());
    let x_grid: Vec<f64> = if x_points == 1 {
        vec![a]
    } else {
        (0..x_points).map(|k| a + (b - a) * k as f64 / (x_points - 1) as f64).collect()
    };
    let mut samples = Vec::with_capacity(x_grid.len() * r_grid.len());
    let mut arg_lo = f64::INFINITY;
    let mut arg_hi = f64::NEG_INFINITY;
    for &x in &x_grid {
        let c = problem.at(x)?;
        let base = c.q / c.w;
        for &r in r_grid {
            samples.push(base + c.p * r);
        }
        let ang = c.p.arg();
        arg_lo = arg_lo.min(ang);
        arg_hi = arg_hi.max(ang);
    }
    let mut ray_directions = vec![arg_lo];
    if arg_hi - arg_lo > 1e-12 {
        ray_directions.push(arg_hi);
    }
    Ok(NumericalRangeHull {
        vertices: convex_hull(&samples),
        samples,
        ray_directions,
        x_grid,
        r_grid: r_grid.to_vec(),
    })
}

fn closest_on_segment(a: Complex64, b: Complex64, z: Complex64) -> Complex64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    a + d * t
}

impl NumericalRangeHull {
    /// Nearest point of the hull boundary to `z`.
    pub fn closest_boundary_point(&self, z: Complex64) -> Complex64 {
        let v = &self.vertices;
        if v.len() == 1 {
            return v[0];
        }
        let n = if v.len() == 2 { 1 } else { v.len() };
        (0..n)
            .map(|i| closest_on_segment(v[i], v[(i + 1) % v.len()], z))
            .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
            .expect("non-empty hull")
    }

    /// Whether `z` lies in the hull, allowing a dilation of `tol * (1 + |z|)`.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        let slack = tol * (1.0 + z.norm());
        let v = &self.vertices;
        if v.len() < 3 {
            return (self.closest_boundary_point(z) - z).norm() <= slack;
        }
        (0..v.len()).all(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            let u = (b - a).unscale((b - a).norm());
            // measure from the nearer end to keep the cancellation small
            let o = if (z - a).norm() <= (z - b).norm() { a } else { b };
            let w = z - o;
            u.re * w.im - u.im * w.re >= -slack
        })
    }
}

/// Rotation and base point separating a test point from the numerical range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub eta: f64,
    pub k: Complex64,
    /// Fraction of samples with `Re[(s - K) e^{iη}] >= 0`.
    pub half_plane_fraction: f64,
    /// `Re[(λ₀ - K) e^{iη}] < 0`.
    pub separates: bool,
}

fn wrap_angle(a: f64) -> f64 {
    let mut t = a % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// `K` is the nearest hull point to `λ₀` and `η` turns `λ₀ - K` onto the negative real axis.
pub fn admissible_pair(hull: &NumericalRangeHull, lambda0: Complex64) -> Result<AdmissiblePair, SimsError> {
    if hull.contains(lambda0, 1e-12) {
        return Err(SimsError::InsideNumericalRange(lambda0));
    }
    let k = hull.closest_boundary_point(lambda0);
    let eta = wrap_angle(PI - (lambda0 - k).arg());
    let rot = Complex64::from_polar(1.0, eta);
    let ok = hull
        .samples
        .iter()
        .filter(|s| ((*s - k) * rot).re >= -1e-12 * (1.0 + s.norm()))
        .count();
    let separates = ((lambda0 - k) * rot).re < 0.0;
    assert!(separates, "nearest-point rotation must separate λ₀ from the hull");
    Ok(AdmissiblePair {
        eta,
        k,
        half_plane_fraction: ok as f64 / hull.samples.len().max(1) as f64,
        separates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuggestedCase {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II-or-III")]
    IIOrIII,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl SuggestedCase {
    pub fn as_str(self) -> &'static str {
        match self {
            SuggestedCase::I => "I",
            SuggestedCase::IIOrIII => "II-or-III",
            SuggestedCase::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    /// Shot forward from `a` with the problem's `φ` data.
    ForwardPhi,
    /// Shot backward from the last truncation point with Dirichlet data;
    /// close to the subdominant solution when one exists.
    BackwardDirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionGrowth {
    pub kind: SolutionKind,
    /// `∫_a^{b_n} |y|² w` at each schedule point.
    pub l2_w: Vec<ScaledComplex>,
    /// `∫_a^{b_n} Re[e^{iη}{p|y'|² + (q - K w)|y|²}] + |y|² w` at each schedule point.
    pub sims_form: Vec<ScaledComplex>,
    pub l2_growth: Growth,
    pub sims_growth: Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDiagnostic {
    pub lambda: Complex64,
    pub pair: AdmissiblePair,
    pub schedule: Vec<f64>,
    pub solutions: Vec<SolutionGrowth>,
    pub suggested: SuggestedCase,
    /// `Re[e^{iη} cos α conj(sin α)] <= 0` for the problem's `α`.
    pub alpha_condition: bool,
}

/// Classifies a nondecreasing sequence by its last two relative increments.
pub fn growth_verdict(values: &[ScaledComplex]) -> Growth {
    if values.len() < 3 {
        return Growth::Inconclusive;
    }
    let inc = |i: usize| {
        let prev = values[i - 1];
        if prev.is_zero() {
            return f64::INFINITY;
        }
        let diff = values[i] - prev;
        (diff.ln_norm() - prev.ln_norm()).exp()
    };
    let n = values.len();
    let (i1, i2) = (inc(n - 2), inc(n - 1));
    if i1 < 0.05 && i2 < 0.05 {
        Growth::Bounded
    } else if i1 > 0.5 && i2 > 0.5 {
        Growth::Growing
    } else {
        Growth::Inconclusive
    }
}

fn integrals(
    problem: &Problem,
    traj: &Trajectory,
    schedule: &[f64],
    pair: &AdmissiblePair,
) -> Result<(Vec<ScaledComplex>, Vec<ScaledComplex>), OdeError> {
    let mut pts = traj.breakpoints();
    pts.extend_from_slice(schedule);
    pts.push(problem.a);
    pts.retain(|&x| x >= problem.a && x <= *schedule.last().expect("schedule"));
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let rot = Complex64::from_polar(1.0, pair.eta);
    let mut failure = None;
    let mut integrand = |x: f64, sims: bool| -> ScaledComplex {
        let s: SlState = traj.eval(x);
        let c = match problem.at(x) {
            Ok(c) => c,
            Err(e) => {
                failure.get_or_insert(e);
                return ScaledComplex::ZERO;
            }
        };
        let y2 = s.y.norm_sqr();
        let mut v = y2 * c.w.re;
        if sims {
            let dy2 = (s.py / c.p).norm_sqr();
            v += (rot * c.p).re * dy2 + (rot * (c.q - pair.k * c.w)).re * y2;
        }
        ScaledComplex::new(Complex64::new(v, 0.0), 2.0 * s.log_scale)
    };
    let l2 = cumulative_gauss(&pts, |x| integrand(x, false));
    let sims = cumulative_gauss(&pts, |x| integrand(x, true));
    if let Some(e) = failure {
        return Err(e);
    }
    let pick = |acc: &[ScaledComplex]| -> Vec<ScaledComplex> {
        schedule
            .iter()
            .map(|b| {
                let i = pts.iter().position(|x| x == b).expect("schedule point is a breakpoint");
                acc[i]
            })
            .collect()
    };
    Ok((pick(&l2), pick(&sims)))
}

fn solution_growth(
    problem: &Problem,
    kind: SolutionKind,
    traj: Result<Trajectory, OdeError>,
    pair: &AdmissiblePair,
) -> Result<SolutionGrowth, SimsError> {
    let schedule = &problem.schedule;
    let traj = match traj {
        Ok(t) => t,
        Err(OdeError::Overflow { .. }) => {
            return Ok(SolutionGrowth {
                kind,
                l2_w: Vec::new(),
                sims_form: Vec::new(),
                l2_growth: Growth::Growing,
                sims_growth: Growth::Growing,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let (l2_w, sims_form) = integrals(problem, &traj, schedule, pair)?;
    Ok(SolutionGrowth {
        kind,
        l2_growth: growth_verdict(&l2_w),
        sims_growth: growth_verdict(&sims_form),
        l2_w,
        sims_form,
    })
}

/// Growth of two independent solutions at `lambda` over the problem's schedule.
pub fn case_diagnostic(
    problem: &Problem,
    lambda: Complex64,
    pair: &AdmissiblePair,
    tol: Tolerances,
) -> Result<CaseDiagnostic, SimsError> {
    if problem.schedule.len() < 3 {
        return Err(SimsError::ScheduleTooShort(problem.schedule.len()));
    }
    let rot = Complex64::from_polar(1.0, pair.eta);
    if ((lambda - pair.k) * rot).re > 0.0 {
        return Err(SimsError::OutsideHalfPlane(lambda));
    }
    let b_last = problem.max_bn();
    let (_, phi0) = left_init(problem.alpha, problem.a);
    let forward = ode::propagate_recorded(problem, lambda, phi0, b_last, tol);
    let back0 = SlState::new(b_last, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let backward = ode::propagate_recorded(problem, lambda, back0, problem.a, tol);
    let solutions = vec![
        solution_growth(problem, SolutionKind::ForwardPhi, forward, pair)?,
        solution_growth(problem, SolutionKind::BackwardDirichlet, backward, pair)?,
    ];
    let bounded = solutions.iter().filter(|s| s.l2_growth == Growth::Bounded).count();
    let suggested = match bounded {
        1 => SuggestedCase::I,
        2 => SuggestedCase::IIOrIII,
        _ => SuggestedCase::Inconclusive,
    };
    let alpha = problem.alpha;
    let alpha_condition = (rot * alpha.cos() * alpha.sin().conj()).re <= 0.0;
    Ok(CaseDiagnostic {
        lambda,
        pair: *pair,
        schedule: problem.schedule.clone(),
        solutions,
        suggested,
        alpha_condition,
    })
}
