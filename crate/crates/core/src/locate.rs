//! Counting and locating zeros of an analytic function inside a rectangle.
//!
//! Counting uses the argument principle without derivatives: the boundary is
//! sampled until consecutive samples differ in phase by less than a quarter
//! turn, and the unwrapped phase change divided by `2π` gives the number of
//! enclosed zeros. Boxes with more than the allowed count are split into
//! quadrants; isolated simple zeros are polished with Muller's method.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mfunc::{compute_miss_distance, ShootingOptions};
use crate::problem::Problem;
use crate::scaled::ScaledComplex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocateError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("function (nearly) vanishes on the contour near λ = {lambda}")]
    NearZeroOnContour { lambda: Complex64 },
    #[error("evaluation failed at λ = {lambda}: {message}")]
    Evaluation { lambda: Complex64, message: String },
    #[error("winding additivity violated: parent {parent}, children sum {children}")]
    AdditivityViolation { parent: i64, children: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ComplexBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, LocateError> {
        if !(re_min < re_max && im_min < im_max) || ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) {
            return Err(LocateError::InvalidBox(format!(
                "[{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Box spanned by two opposite corners.
    pub fn from_corners(z1: Complex64, z2: Complex64) -> Result<Self, LocateError> {
        Self::new(z1.re.min(z2.re), z1.re.max(z2.re), z1.im.min(z2.im), z1.im.max(z2.im))
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Grows every side outward by `amount`.
    pub fn dilate(&self, amount: f64) -> Self {
        Self {
            re_min: self.re_min - amount,
            re_max: self.re_max + amount,
            im_min: self.im_min - amount,
            im_max: self.im_max + amount,
        }
    }

    /// Corners in counterclockwise order starting at the bottom left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Four sub-boxes split at the given fractions of width and height.
    pub fn split(&self, fx: f64, fy: f64) -> [ComplexBox; 4] {
        let xm = self.re_min + fx * self.width();
        let ym = self.im_min + fy * self.height();
        [
            ComplexBox { re_max: xm, im_max: ym, ..*self },
            ComplexBox { re_min: xm, im_max: ym, ..*self },
            ComplexBox { re_max: xm, im_min: ym, ..*self },
            ComplexBox { re_min: xm, im_min: ym, ..*self },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingOptions {
    /// Segments per side before adaptive refinement.
    pub initial_per_side: usize,
    /// Finest allowed segments per side.
    pub max_per_side: usize,
    /// Largest accepted phase change between neighbouring samples.
    pub max_phase_step: f64,
    /// Largest accepted modulus ratio between neighbouring samples.
    pub max_ratio: f64,
    /// Samples with scale-adjusted modulus below this count as zeros on the contour.
    pub zero_threshold: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self {
            initial_per_side: 16,
            max_per_side: 1 << 16,
            max_phase_step: FRAC_PI_2,
            max_ratio: 8.0,
            zero_threshold: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocateOptions {
    pub winding: WindingOptions,
    /// Boxes are split until they hold at most this many zeros.
    pub max_per_box: i64,
    /// Smallest box diameter, relative to the search box diagonal.
    pub isolation: f64,
    /// Muller stops when the step falls below `refine_rel * |λ|` (but not below `refine_floor`).
    pub refine_rel: f64,
    pub refine_floor: f64,
    /// Largest modulus at a refined zero, relative to the Muller starting samples.
    pub residual_tol: f64,
    pub max_muller_iterations: usize,
    pub max_depth: usize,
    /// Outward dilations (1% of the diagonal each) tried when a zero sits on the search box boundary.
    pub perturb_retries: usize,
}

impl Default for LocateOptions {
    fn default() -> Self {
        Self {
            winding: WindingOptions::default(),
            max_per_box: 1,
            isolation: 1e-3,
            refine_rel: 1e-10,
            refine_floor: 1e-12,
            residual_tol: 1e-6,
            max_muller_iterations: 80,
            max_depth: 40,
            perturb_retries: 3,
        }
    }
}

/// A located zero (eigenvalue) with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEstimate {
    pub lambda: Complex64,
    pub multiplicity: i64,
    pub residual: f64,
    pub b_n: f64,
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSearch {
    pub estimates: Vec<EigenvalueEstimate>,
    /// Winding number of the (possibly dilated) search box.
    pub total_winding: i64,
    /// The box actually searched after any boundary perturbation.
    pub searched: ComplexBox,
    pub evaluations: usize,
    /// Split attempts whose child windings did not add up to the parent's.
    pub additivity_violations: usize,
}

/// Memoizing, batch-parallel wrapper around the function whose zeros are sought.
pub struct Evaluator<F> {
    f: F,
    cache: Mutex<HashMap<(u64, u64), ScaledComplex>>,
}

impl<F> Evaluator<F>
where
    F: Fn(Complex64) -> Result<ScaledComplex, LocateError> + Sync,
{
    pub fn new(f: F) -> Self {
        Self {
            f,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn key(z: Complex64) -> (u64, u64) {
        // +0.0 and −0.0 are the same point
        ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
    }

    pub fn evaluations(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn eval(&self, z: Complex64) -> Result<ScaledComplex, LocateError> {
        Ok(self.eval_many(&[z])?[0])
    }

    pub fn eval_many(&self, zs: &[Complex64]) -> Result<Vec<ScaledComplex>, LocateError> {
        let missing: Vec<Complex64> = {
            let cache = self.cache.lock().expect("cache lock");
            let mut seen = std::collections::HashSet::new();
            zs.iter()
                .copied()
                .filter(|z| !cache.contains_key(&Self::key(*z)) && seen.insert(Self::key(*z)))
                .collect()
        };
        let computed: Vec<Result<ScaledComplex, LocateError>> = missing.par_iter().map(|z| (self.f)(*z)).collect();
        let mut cache = self.cache.lock().expect("cache lock");
        for (z, v) in missing.iter().zip(computed) {
            cache.insert(Self::key(*z), v?);
        }
        Ok(zs.iter().map(|z| cache[&Self::key(*z)]).collect())
    }
}

#[derive(Clone, Copy)]
struct Sample {
    z: Complex64,
    f: ScaledComplex,
}

fn segment_ok(a: &Sample, b: &Sample, opts: &WindingOptions) -> bool {
    let phase = (b.f.value * a.f.value.conj()).arg().abs();
    let (ma, mb) = (a.f.value.norm(), b.f.value.norm());
    let ratio_ok = mb <= opts.max_ratio * ma && ma <= opts.max_ratio * mb;
    phase < opts.max_phase_step && ratio_ok
}

/// Winding number of `f` around the boundary of `bx`.
pub fn winding_number<F>(eval: &Evaluator<F>, bx: &ComplexBox, opts: &WindingOptions) -> Result<i64, LocateError>
where
    F: Fn(Complex64) -> Result<ScaledComplex, LocateError> + Sync,
{
    let corners = bx.corners();
    let n0 = opts.initial_per_side.max(1);
    let mut points = Vec::with_capacity(4 * n0 + 1);
    for side in 0..4 {
        let (za, zb) = (corners[side], corners[(side + 1) % 4]);
        for k in 0..n0 {
            points.push(za + (zb - za) * (k as f64 / n0 as f64));
        }
    }
    points.push(corners[0]);
    let values = eval.eval_many(&points)?;
    let samples: Vec<Sample> = points.iter().zip(&values).map(|(&z, &f)| Sample { z, f }).collect();
    check_samples(&samples, opts)?;
    let max_depth = ((opts.max_per_side as f64 / n0 as f64).log2().floor().max(0.0)) as u32;
    let path = resolve(eval, &samples, opts, max_depth)?;
    Ok(path_winding(&path))
}

fn check_samples(samples: &[Sample], opts: &WindingOptions) -> Result<(), LocateError> {
    match samples
        .iter()
        .find(|s| s.f.value.norm() < opts.zero_threshold || !s.f.value.is_finite())
    {
        Some(s) => Err(LocateError::NearZeroOnContour { lambda: s.z }),
        None => Ok(()),
    }
}

fn path_winding(path: &[Sample]) -> i64 {
    let total: f64 = path.windows(2).map(|w| (w[1].f.value * w[0].f.value.conj()).arg()).sum();
    (total / (2.0 * PI)).round() as i64
}

/// Second differences at `m` between its path neighbours `a` and `b`: the
/// phase rates on either side must agree and `ln|f|` must not dip below the
/// interpolation of its neighbours. A zero close to the contour shows up as
/// such a dip even when it aliases the phase change of the segment passing
/// it.
fn curved(a: &Sample, m: &Sample, b: &Sample, opts: &WindingOptions) -> bool {
    let (hl, hr) = ((m.z - a.z).norm(), (b.z - m.z).norm());
    let dl = (m.f.value * a.f.value.conj()).arg();
    let dr = (b.f.value * m.f.value.conj()).arg();
    let phase = (dl / hl - dr / hr).abs() * 0.5 * (hl + hr);
    let ln = |s: &Sample| s.f.value.norm().ln();
    let dip = (ln(a) * hr + ln(b) * hl) / (hl + hr) - ln(m);
    phase > 0.5 * opts.max_phase_step || dip > 0.5 * opts.max_ratio.ln()
}

/// Bisects segments of the closed path until every segment passes the phase
/// and ratio rule and no sample shows a curvature defect.
fn resolve<F>(eval: &Evaluator<F>, samples: &[Sample], opts: &WindingOptions, max_depth: u32) -> Result<Vec<Sample>, LocateError>
where
    F: Fn(Complex64) -> Result<ScaledComplex, LocateError> + Sync,
{
    // (sample, bisection depth)
    let mut path: Vec<(Sample, u32)> = samples.iter().map(|&s| (s, 0)).collect();
    loop {
        let n = path.len() - 1;
        let mut bad = vec![false; n];
        for i in 0..n {
            if !segment_ok(&path[i].0, &path[i + 1].0, opts) {
                bad[i] = true;
            }
            // the first point is also the last, so its left neighbour wraps
            let l = if i == 0 { n - 1 } else { i - 1 };
            if curved(&path[l].0, &path[i].0, &path[i + 1].0, opts) {
                bad[l] = true;
                bad[i] = true;
            }
        }
        let split: Vec<usize> = (0..n).filter(|&i| bad[i]).collect();
        if split.is_empty() {
            break;
        }
        let mut mids = Vec::with_capacity(split.len());
        for &i in &split {
            let mid = 0.5 * (path[i].0.z + path[i + 1].0.z);
            if path[i].1.max(path[i + 1].1) >= max_depth {
                return Err(LocateError::NearZeroOnContour { lambda: mid });
            }
            mids.push(mid);
        }
        let values = eval.eval_many(&mids)?;
        let fresh: Vec<Sample> = mids.iter().zip(&values).map(|(&z, &f)| Sample { z, f }).collect();
        check_samples(&fresh, opts)?;
        let mut next = Vec::with_capacity(path.len() + split.len());
        let mut k = 0;
        for i in 0..=n {
            next.push(path[i]);
            if k < split.len() && split[k] == i {
                let depth = path[i].1.max(path[i + 1].1) + 1;
                next.push((fresh[k], depth));
                k += 1;
            }
        }
        path = next;
    }
    Ok(path.into_iter().map(|(s, _)| s).collect())
}

fn muller<F>(eval: &Evaluator<F>, bx: &ComplexBox, opts: &LocateOptions) -> Result<Option<(Complex64, f64)>, LocateError>
where
    F: Fn(Complex64) -> Result<ScaledComplex, LocateError> + Sync,
{
    let c = bx.center();
    let d = 0.25 * bx.width().min(bx.height());
    let mut xs = [c - d, c + d, c + Complex64::new(0.0, d)];
    let mut fs = [eval.eval(xs[0])?, eval.eval(xs[1])?, eval.eval(xs[2])?];
    // residuals are reported relative to the size of f at the starting points
    let start = fs.iter().map(|f| f.ln_norm()).fold(f64::NEG_INFINITY, f64::max);
    let relative = |f: &ScaledComplex| (f.ln_norm() - start).exp();
    let slack = bx.dilate(0.05 * bx.diagonal());
    for _ in 0..opts.max_muller_iterations {
        let reference = fs.iter().map(|f| f.log_scale).fold(f64::NEG_INFINITY, f64::max);
        let [f0, f1, f2] = fs.map(|f| f.relative_to(reference));
        let [x0, x1, x2] = xs;
        if fs[2].is_zero() {
            return Ok(Some((x2, 0.0)));
        }
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        let d1 = (f1 - f0) / h1;
        let d2 = (f2 - f1) / h2;
        let a = (d2 - d1) / (h2 + h1);
        let b = a * h2 + d2;
        let disc = (b * b - 4.0 * a * f2).sqrt();
        let den = if (b + disc).norm() >= (b - disc).norm() { b + disc } else { b - disc };
        let step = if den.norm() == 0.0 || !den.is_finite() {
            // flat quadratic model: nudge and continue
            Complex64::new(1e-3 * d, 1e-3 * d)
        } else {
            -2.0 * f2 / den
        };
        let x3 = x2 + step;
        if !x3.is_finite() || !slack.contains(x3) {
            return Ok(None);
        }
        let f3 = eval.eval(x3)?;
        xs = [x1, x2, x3];
        fs = [fs[1], fs[2], f3];
        let tol = (opts.refine_rel * x3.norm()).max(opts.refine_floor);
        if step.norm() < tol {
            return Ok(Some((x3, relative(&f3))));
        }
    }
    Ok(None)
}

/// Finds all zeros of `f` in `bx` with multiplicities.
pub fn locate_zeros<F>(eval: &Evaluator<F>, bx: &ComplexBox, opts: &LocateOptions) -> Result<ZeroSearch, LocateError>
where
    F: Fn(Complex64) -> Result<ScaledComplex, LocateError> + Sync,
{
    let mut searched = *bx;
    let mut attempt = 0;
    let total = loop {
        match winding_number(eval, &searched, &opts.winding) {
            Ok(w) => break w,
            Err(LocateError::NearZeroOnContour { .. }) if attempt < opts.perturb_retries => {
                attempt += 1;
                searched = bx.dilate(0.01 * bx.diagonal() * attempt as f64);
            }
            Err(e) => return Err(e),
        }
    };

    let isolation = opts.isolation * searched.diagonal();
    let mut estimates = Vec::new();
    let mut violations = 0usize;
    let mut queue: VecDeque<(ComplexBox, i64, usize)> = VecDeque::new();
    if total != 0 {
        queue.push_back((searched, total, 0));
    }
    const SPLITS: [(f64, f64); 5] = [(0.5, 0.5), (0.45, 0.55), (0.55, 0.45), (0.4, 0.6), (0.6, 0.4)];

    while let Some((cur, w, depth)) = queue.pop_front() {
        let small = cur.diagonal() < isolation || depth >= opts.max_depth;
        if w == 1 {
            if let Some((z, residual)) = muller(eval, &cur, opts)? {
                if cur.contains(z) {
                    estimates.push(EigenvalueEstimate {
                        lambda: z,
                        multiplicity: 1,
                        residual,
                        b_n: 0.0,
                        refined: residual <= opts.residual_tol,
                    });
                    continue;
                }
            }
        } else if w <= opts.max_per_box && w > 0 && !small {
            // allowed cluster: report without polishing
            estimates.push(unrefined(eval, &cur, w)?);
            continue;
        }
        if small {
            estimates.push(unrefined(eval, &cur, w)?);
            continue;
        }

        let mut children = None;
        for (fx, fy) in SPLITS {
            let boxes = cur.split(fx, fy);
            let results: Vec<Result<i64, LocateError>> =
                boxes.par_iter().map(|b| winding_number(eval, b, &opts.winding)).collect();
            if results.iter().any(|r| matches!(r, Err(LocateError::NearZeroOnContour { .. }))) {
                continue;
            }
            let ws: Vec<i64> = results.into_iter().collect::<Result<_, _>>()?;
            let sum: i64 = ws.iter().sum();
            if sum != w {
                violations += 1;
                continue;
            }
            children = Some((boxes, ws));
            break;
        }
        match children {
            Some((boxes, ws)) => {
                for (b, cw) in boxes.into_iter().zip(ws) {
                    if cw != 0 {
                        queue.push_back((b, cw, depth + 1));
                    }
                }
            }
            None => estimates.push(unrefined(eval, &cur, w)?),
        }
    }

    estimates.sort_by(|a, b| order_key(a.lambda).partial_cmp(&order_key(b.lambda)).expect("finite"));
    Ok(ZeroSearch {
        estimates,
        total_winding: total,
        searched,
        evaluations: eval.evaluations(),
        additivity_violations: violations,
    })
}

fn unrefined<F>(eval: &Evaluator<F>, bx: &ComplexBox, w: i64) -> Result<EigenvalueEstimate, LocateError>
where
    F: Fn(Complex64) -> Result<ScaledComplex, LocateError> + Sync,
{
    let z = bx.center();
    let corners = eval.eval_many(&bx.corners())?;
    let scale = corners.iter().map(|f| f.ln_norm()).fold(f64::NEG_INFINITY, f64::max);
    Ok(EigenvalueEstimate {
        lambda: z,
        multiplicity: w,
        residual: (eval.eval(z)?.ln_norm() - scale).exp(),
        b_n: 0.0,
        refined: false,
    })
}

/// Sort key used for every emitted list: modulus, then argument.
pub fn order_key(z: Complex64) -> (f64, f64) {
    (z.norm(), z.arg())
}

/// Options for eigenvalue searches on a truncated problem.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FindOptions {
    pub shooting: ShootingOptions,
    pub locate: LocateOptions,
}

/// Eigenvalues of the problem truncated at `b_n` inside `bx`.
pub fn find_eigenvalues(problem: &Problem, b_n: f64, bx: &ComplexBox, opts: &FindOptions) -> Result<ZeroSearch, LocateError> {
    let shooting = opts.shooting;
    let eval = Evaluator::new(|lambda: Complex64| {
        compute_miss_distance(problem, b_n, lambda, &shooting)
            .map(|d| d.scaled())
            .map_err(|e| LocateError::Evaluation {
                lambda,
                message: e.to_string(),
            })
    });
    let mut search = locate_zeros(&eval, bx, &opts.locate)?;
    for e in &mut search.estimates {
        e.b_n = b_n;
    }
    Ok(search)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(roots: Vec<(Complex64, i32)>) -> impl Fn(Complex64) -> Result<ScaledComplex, LocateError> + Sync {
        move |z| {
            let mut v = c(1.0, 0.0);
            for (r, m) in &roots {
                v *= (z - r).powi(*m);
            }
            Ok(ScaledComplex::from_complex(v))
        }
    }

    #[test]
    fn single_root() {
        let ev = Evaluator::new(poly(vec![(c(1.0, 1.0), 1)]));
        let bx = ComplexBox::new(0.0, 2.0, 0.0, 2.0).unwrap();
        assert_eq!(winding_number(&ev, &bx, &WindingOptions::default()).unwrap(), 1);
    }

    #[test]
    fn polynomial_orders() {
        let ev = Evaluator::new(poly(vec![(c(1.0, 0.0), 2), (c(-1.0, 0.0), 1)]));
        let bx = ComplexBox::new(0.0, 2.0, -1.0, 1.0).unwrap();
        assert_eq!(winding_number(&ev, &bx, &WindingOptions::default()).unwrap(), 2);
    }

    #[test]
    fn multiplicities_reported() {
        let z1 = c(0.3, 0.7);
        let z2 = c(-0.6, -0.2);
        let ev = Evaluator::new(poly(vec![(z1, 2), (z2, 1)]));
        let bx = ComplexBox::new(-1.0, 1.1, -1.0, 1.2).unwrap();
        let res = locate_zeros(&ev, &bx, &LocateOptions::default()).unwrap();
        assert_eq!(res.additivity_violations, 0);
        assert_eq!(res.total_winding, 3);
        let mut mults: Vec<i64> = res.estimates.iter().map(|e| e.multiplicity).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 2]);
        let simple = res.estimates.iter().find(|e| e.multiplicity == 1).unwrap();
        assert!(simple.refined);
        assert!((simple.lambda - z2).norm() < 1e-10);
        let double = res.estimates.iter().find(|e| e.multiplicity == 2).unwrap();
        assert!((double.lambda - z1).norm() < 1e-3 * bx.diagonal());
    }

    #[test]
    fn empty_box() {
        let ev = Evaluator::new(poly(vec![(c(5.0, 5.0), 1)]));
        let bx = ComplexBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let res = locate_zeros(&ev, &bx, &LocateOptions::default()).unwrap();
        assert!(res.estimates.is_empty());
        assert_eq!(res.total_winding, 0);
    }

    #[test]
    fn zero_on_boundary_is_perturbed() {
        let ev = Evaluator::new(poly(vec![(c(1.0, 0.0), 1)]));
        let bx = ComplexBox::new(1.0, 2.0, -1.0, 1.0).unwrap();
        let res = locate_zeros(&ev, &bx, &LocateOptions::default()).unwrap();
        assert_eq!(res.total_winding, 1);
        assert!(res.searched.re_min < 1.0);
    }

    #[test]
    fn constant_rescaling_keeps_winding() {
        let roots = vec![(c(0.2, 0.1), 1), (c(-0.3, 0.4), 3)];
        let bx = ComplexBox::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let base = Evaluator::new(poly(roots.clone()));
        let w0 = winding_number(&base, &bx, &WindingOptions::default()).unwrap();
        for k in [c(7.0, 3.0), c(-1e-8, 2.0), c(1e12, -1e12)] {
            let p = poly(roots.clone());
            let scaled = Evaluator::new(move |z| p(z).map(|v| v * k));
            assert_eq!(winding_number(&scaled, &bx, &WindingOptions::default()).unwrap(), w0);
        }
    }

    #[test]
    fn invalid_box_rejected() {
        assert!(ComplexBox::new(1.0, 0.0, 0.0, 1.0).is_err());
    }
}
