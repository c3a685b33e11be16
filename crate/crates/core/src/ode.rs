//! Adaptive integration of the first-order system equivalent to
//! `-(p y')' + q y = λ w y`:
//!
//! ```text
//! y'      = (p y') / p
//! (p y')' = (q - λ w) y
//! ```
//!
//! The state is complex and carried with a separate real log-scale so that
//! exponentially growing solutions never overflow. Steps use the
//! Dormand–Prince 5(4) pair with its 4th-order continuous extension.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::ExprError;
use crate::scaled::ScaledComplex;

const RENORM_HIGH: f64 = 1e100;
const RENORM_LOW: f64 = 1e-100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("step limit of {limit} exceeded at x = {x}")]
    TooManySteps { x: f64, limit: usize },
    #[error("coefficient evaluation failed at x = {x}: {source}")]
    Coefficient { x: f64, source: ExprError },
    #[error("leading coefficient p vanishes at x = {x}")]
    SingularLeadingCoefficient { x: f64 },
    #[error("solution overflowed at x = {x}")]
    Overflow { x: f64 },
}

/// Values of `p`, `q`, `w` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientValues {
    pub p: Complex64,
    pub q: Complex64,
    pub w: Complex64,
}

/// Anything that can supply the coefficients of the equation at real `x`.
pub trait Coefficients: Sync {
    fn at(&self, x: f64) -> Result<CoefficientValues, OdeError>;
}

impl<F> Coefficients for F
where
    F: Fn(f64) -> CoefficientValues + Sync,
{
    fn at(&self, x: f64) -> Result<CoefficientValues, OdeError> {
        Ok(self(x))
    }
}

/// Solution value `(y, p y')` at `x`, true value `(y, py) * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlState {
    pub x: f64,
    pub y: Complex64,
    pub py: Complex64,
    pub log_scale: f64,
}

impl SlState {
    pub fn new(x: f64, y: Complex64, py: Complex64) -> Self {
        Self {
            x,
            y,
            py,
            log_scale: 0.0,
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.y.norm().max(self.py.norm())
    }

    /// `y` with the scale folded in.
    pub fn y_scaled(&self) -> ScaledComplex {
        ScaledComplex::new(self.y, self.log_scale)
    }

    pub fn py_scaled(&self) -> ScaledComplex {
        ScaledComplex::new(self.py, self.log_scale)
    }

    /// Divides out the state's magnitude into `log_scale`.
    pub fn normalized(mut self) -> Self {
        let n = self.magnitude();
        if n > 0.0 && n.is_finite() {
            self.y /= n;
            self.py /= n;
            self.log_scale += n.ln();
        }
        self
    }

    fn renormalize_if_needed(&mut self) {
        let n = self.magnitude();
        if n > 0.0 && !(RENORM_LOW..=RENORM_HIGH).contains(&n) {
            self.y /= n;
            self.py /= n;
            self.log_scale += n.ln();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self { abs: tol, rel: tol }
    }
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub h: f64,
    pub log_scale: f64,
    cont: [[Complex64; 2]; 5],
}

impl Segment {
    pub fn x1(&self) -> f64 {
        self.x0 + self.h
    }

    pub fn lo(&self) -> f64 {
        self.x0.min(self.x1())
    }

    pub fn hi(&self) -> f64 {
        self.x0.max(self.x1())
    }

    /// Dense output at `x` inside the step.
    pub fn eval(&self, x: f64) -> SlState {
        let s = (x - self.x0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        let comp = |i: usize| c[0][i] + (c[1][i] + (c[2][i] + (c[3][i] + c[4][i] * s1) * s) * s1) * s;
        SlState {
            x,
            y: comp(0),
            py: comp(1),
            log_scale: self.log_scale,
        }
    }
}

/// Recorded solution over an interval with dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mesh: Vec<SlState>,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn start(&self) -> &SlState {
        &self.mesh[0]
    }

    pub fn end(&self) -> &SlState {
        self.mesh.last().expect("trajectory has at least one state")
    }

    pub fn lo(&self) -> f64 {
        self.start().x.min(self.end().x)
    }

    pub fn hi(&self) -> f64 {
        self.start().x.max(self.end().x)
    }

    /// Dense evaluation at any `x` in the integrated range.
    pub fn eval(&self, x: f64) -> SlState {
        if self.segments.is_empty() {
            return SlState { x, ..*self.start() };
        }
        let forward = self.segments[0].h > 0.0;
        // index of the first segment whose far end lies beyond x
        let idx = self.segments.partition_point(|seg| {
            if forward {
                seg.x1() < x
            } else {
                seg.x1() > x
            }
        });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        seg.eval(x)
    }

    /// Segment boundaries sorted increasingly.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.mesh.iter().map(|s| s.x).collect();
        pts.sort_by(f64::total_cmp);
        pts
    }
}

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const MAX_STEPS: usize = 2_000_000;

type Vec2 = [Complex64; 2];

fn rhs<C: Coefficients + ?Sized>(coeffs: &C, lambda: Complex64, x: f64, u: &Vec2) -> Result<Vec2, OdeError> {
    let c = coeffs.at(x)?;
    if c.p == Complex64::new(0.0, 0.0) {
        return Err(OdeError::SingularLeadingCoefficient { x });
    }
    Ok([u[1] / c.p, (c.q - lambda * c.w) * u[0]])
}

fn axpy(u: &Vec2, h: f64, terms: &[(f64, &Vec2)]) -> Vec2 {
    let mut out = *u;
    for (a, k) in terms {
        if *a != 0.0 {
            out[0] += k[0] * (h * a);
            out[1] += k[1] * (h * a);
        }
    }
    out
}

fn integrate<C: Coefficients + ?Sized>(
    coeffs: &C,
    lambda: Complex64,
    init: SlState,
    to: f64,
    tol: Tolerances,
    mut record: Option<&mut Trajectory>,
) -> Result<SlState, OdeError> {
    let span = to - init.x;
    if span == 0.0 {
        return Ok(init);
    }
    let dir = span.signum();
    let mut state = init;
    let mut u: Vec2 = [state.y, state.py];
    let mut k1 = rhs(coeffs, lambda, state.x, &u)?;
    let mut h = dir * (span.abs() * 1e-3).min(0.05);
    let mut steps = 0usize;

    while (to - state.x) * dir > 0.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(OdeError::TooManySteps {
                x: state.x,
                limit: MAX_STEPS,
            });
        }
        let x = state.x;
        let remaining = to - x;
        let last = h.abs() >= remaining.abs();
        if last {
            h = remaining;
        }
        if h.abs() < 1e-14 * x.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { x });
        }

        let k2 = rhs(coeffs, lambda, x + C[1] * h, &axpy(&u, h, &[(A[1][0], &k1)]))?;
        let k3 = rhs(coeffs, lambda, x + C[2] * h, &axpy(&u, h, &[(A[2][0], &k1), (A[2][1], &k2)]))?;
        let k4 = rhs(
            coeffs,
            lambda,
            x + C[3] * h,
            &axpy(&u, h, &[(A[3][0], &k1), (A[3][1], &k2), (A[3][2], &k3)]),
        )?;
        let k5 = rhs(
            coeffs,
            lambda,
            x + C[4] * h,
            &axpy(&u, h, &[(A[4][0], &k1), (A[4][1], &k2), (A[4][2], &k3), (A[4][3], &k4)]),
        )?;
        let k6 = rhs(
            coeffs,
            lambda,
            x + h,
            &axpy(
                &u,
                h,
                &[(A[5][0], &k1), (A[5][1], &k2), (A[5][2], &k3), (A[5][3], &k4), (A[5][4], &k5)],
            ),
        )?;
        let unew = axpy(
            &u,
            h,
            &[(A[6][0], &k1), (A[6][2], &k3), (A[6][3], &k4), (A[6][4], &k5), (A[6][5], &k6)],
        );
        let x_new = if last { to } else { x + h };
        let k7 = rhs(coeffs, lambda, x_new, &unew)?;

        let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        let norm = u[0].norm().max(u[1].norm());
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, k) in ks.iter().enumerate() {
                if E[j] != 0.0 {
                    e += k[i] * E[j];
                }
            }
            let sk = tol.abs * norm + tol.rel * u[i].norm().max(unew[i].norm());
            err = err.max((e * h).norm() / sk);
        }

        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            if let Some(traj) = record.as_deref_mut() {
                let ydiff = [unew[0] - u[0], unew[1] - u[1]];
                let bspl = [k1[0] * h - ydiff[0], k1[1] * h - ydiff[1]];
                let mut dsum = [Complex64::new(0.0, 0.0); 2];
                for (j, k) in ks.iter().enumerate() {
                    if D[j] != 0.0 {
                        dsum[0] += k[0] * D[j];
                        dsum[1] += k[1] * D[j];
                    }
                }
                traj.segments.push(Segment {
                    x0: x,
                    h: x_new - x,
                    log_scale: state.log_scale,
                    cont: [
                        u,
                        ydiff,
                        bspl,
                        [ydiff[0] - k7[0] * h - bspl[0], ydiff[1] - k7[1] * h - bspl[1]],
                        [dsum[0] * h, dsum[1] * h],
                    ],
                });
            }
            state.x = x_new;
            state.y = unew[0];
            state.py = unew[1];
            if !state.y.is_finite() || !state.py.is_finite() {
                return Err(OdeError::Overflow { x: x_new });
            }
            let before = state.log_scale;
            state.renormalize_if_needed();
            let factor = (before - state.log_scale).exp();
            u = [state.y, state.py];
            k1 = if factor != 1.0 {
                [k7[0] * factor, k7[1] * factor]
            } else {
                k7
            };
            if let Some(traj) = record.as_deref_mut() {
                traj.mesh.push(state);
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                h *= fac;
            }
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(state)
}

/// Integrates from `init.x` to `to` (either direction) and returns the end state.
pub fn propagate<C: Coefficients + ?Sized>(
    coeffs: &C,
    lambda: Complex64,
    init: SlState,
    to: f64,
    tol: Tolerances,
) -> Result<SlState, OdeError> {
    integrate(coeffs, lambda, init, to, tol, None)
}

/// Integrates from `init.x` to `to`, recording every step for dense output.
pub fn propagate_recorded<C: Coefficients + ?Sized>(
    coeffs: &C,
    lambda: Complex64,
    init: SlState,
    to: f64,
    tol: Tolerances,
) -> Result<Trajectory, OdeError> {
    let mut traj = Trajectory {
        mesh: vec![init],
        segments: Vec::new(),
    };
    integrate(coeffs, lambda, init, to, tol, Some(&mut traj))?;
    Ok(traj)
}

/// Four-point Gauss–Legendre nodes and weights on [-1, 1].
pub(crate) const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Composite 4-point Gauss rule of `f` over consecutive breakpoints, returning
/// the cumulative integral at each breakpoint (first entry zero).
pub(crate) fn cumulative_gauss<F>(breakpoints: &[f64], mut f: F) -> Vec<ScaledComplex>
where
    F: FnMut(f64) -> ScaledComplex,
{
    let mut acc = ScaledComplex::ZERO;
    let mut out = Vec::with_capacity(breakpoints.len());
    out.push(acc);
    for w in breakpoints.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        if half > 0.0 {
            let mid = 0.5 * (hi + lo);
            for (node, weight) in GAUSS4 {
                acc = acc + f(mid + half * node) * Complex64::new(weight * half, 0.0);
            }
        }
        out.push(acc);
    }
    out
}
