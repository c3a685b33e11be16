//! Truncated operator families: coefficients, endpoint data and boundary
//! conditions.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::ode::{CoefficientValues, Coefficients, OdeError, SlState};

/// Number of mesh points used when validating `w > 0` and `p != 0`.
const VALIDATION_MESH: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("truncation schedule is empty")]
    EmptySchedule,
    #[error("truncation schedule must be strictly increasing (at index {0})")]
    ScheduleNotIncreasing(usize),
    #[error("truncation point {point} lies outside ({a}, {b}]")]
    ScheduleOutOfRange { point: f64, a: f64, b: f64 },
    #[error("schedule needs at least 2 points, got {0}")]
    ScheduleTooShort(usize),
    #[error("weight w must be real and positive; w({x}) = {value}")]
    NonPositiveWeight { x: f64, value: Complex64 },
    #[error("leading coefficient p vanishes at x = {x}")]
    VanishingP { x: f64 },
    #[error("reference solution and its quasi-derivative both vanish at b_n = {0}")]
    DegenerateReference(f64),
    #[error("coefficient `{which}` failed at x = {x}: {source}")]
    Coefficient {
        which: &'static str,
        x: f64,
        source: ExprError,
    },
}

/// The singular (right) endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Finite(f64),
    Infinite,
}

impl Endpoint {
    /// Whether `x` is an admissible truncation point; a finite `b` itself is allowed.
    pub fn admits(&self, x: f64) -> bool {
        match self {
            Endpoint::Finite(b) => x <= *b,
            Endpoint::Infinite => x.is_finite(),
        }
    }
}

/// Boundary condition imposed at each truncation point `b_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum RightBc {
    Dirichlet,
    /// `y cos β + p y' sin β = 0`
    Angle(Complex64),
    /// Wronskian condition `[y, v](b_n) = 0` against a user-supplied solution `v`.
    ReferenceSolution { v: Expr, dv: Expr },
}

impl RightBc {
    pub fn reference(v: Expr) -> Self {
        let dv = v.differentiate();
        RightBc::ReferenceSolution { v, dv }
    }
}

/// Which left boundary condition a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// `y(a) cos α + p y'(a) sin α = 0`
    M,
    /// `y(a) sin α − p y'(a) cos α = 0`
    L,
}

impl Family {
    pub fn other(self) -> Family {
        match self {
            Family::M => Family::L,
            Family::L => Family::M,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub p: Expr,
    pub q: Expr,
    pub w: Expr,
    pub a: f64,
    pub b: Endpoint,
    pub alpha: Complex64,
    pub right_bc: RightBc,
    pub schedule: Vec<f64>,
}

impl Problem {
    /// Validates and builds a problem. Expressions must already be bound
    /// (no free parameters).
    pub fn new(
        p: Expr,
        q: Expr,
        w: Expr,
        a: f64,
        b: Endpoint,
        alpha: Complex64,
        right_bc: RightBc,
        schedule: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        let problem = Self {
            p,
            q,
            w,
            a,
            b,
            alpha,
            right_bc,
            schedule,
        };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<(), ProblemError> {
        if self.schedule.is_empty() {
            return Err(ProblemError::EmptySchedule);
        }
        for (i, pair) in self.schedule.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(ProblemError::ScheduleNotIncreasing(i + 1));
            }
        }
        for &bn in &self.schedule {
            if !(bn > self.a && self.b.admits(bn)) {
                return Err(ProblemError::ScheduleOutOfRange {
                    point: bn,
                    a: self.a,
                    b: match self.b {
                        Endpoint::Finite(b) => b,
                        Endpoint::Infinite => f64::INFINITY,
                    },
                });
            }
        }
        let hi = self.max_bn();
        let mut prev_p: Option<Complex64> = None;
        for k in 0..VALIDATION_MESH {
            let x = self.a + (hi - self.a) * k as f64 / (VALIDATION_MESH - 1) as f64;
            let p = self.eval_coeff("p", &self.p, x)?;
            // an exact zero, or a sign change of a real-valued p between mesh points
            let crossed = prev_p.is_some_and(|q| q.im == 0.0 && p.im == 0.0 && q.re * p.re < 0.0);
            if p == Complex64::new(0.0, 0.0) || crossed {
                return Err(ProblemError::VanishingP { x });
            }
            prev_p = Some(p);
            let w = self.eval_coeff("w", &self.w, x)?;
            if !(w.re > 0.0) || w.im.abs() > 1e-14 * w.re {
                return Err(ProblemError::NonPositiveWeight { x, value: w });
            }
        }
        Ok(())
    }

    fn eval_coeff(&self, which: &'static str, e: &Expr, x: f64) -> Result<Complex64, ProblemError> {
        e.eval_at(Complex64::new(x, 0.0))
            .map_err(|source| ProblemError::Coefficient { which, x, source })
    }

    pub fn max_bn(&self) -> f64 {
        *self.schedule.last().expect("validated nonempty schedule")
    }

    /// Same problem with a different left boundary angle.
    pub fn with_alpha(&self, alpha: Complex64) -> Problem {
        Problem {
            alpha,
            ..self.clone()
        }
    }

    pub fn with_schedule(&self, schedule: Vec<f64>) -> Result<Problem, ProblemError> {
        let p = Problem {
            schedule,
            ..self.clone()
        };
        p.validate()?;
        Ok(p)
    }

    /// The problem for the requested family: `M` keeps α, `L` uses the
    /// swapped condition.
    pub fn for_family(&self, family: Family) -> Problem {
        match family {
            Family::M => self.clone(),
            Family::L => self.with_alpha(swap_alpha(self.alpha)),
        }
    }

    pub fn p_at(&self, x: f64) -> Result<Complex64, ProblemError> {
        self.eval_coeff("p", &self.p, x)
    }

    /// Boundary coefficients `(cβ, sβ)` at truncation point `bn`.
    pub fn right_bc_coefficients(&self, bn: f64) -> Result<(Complex64, Complex64), ProblemError> {
        right_bc_coefficients(&self.right_bc, self.p_at(bn)?, bn)
    }
}

impl Coefficients for Problem {
    fn at(&self, x: f64) -> Result<CoefficientValues, OdeError> {
        let z = Complex64::new(x, 0.0);
        let eval = |e: &Expr| e.eval_at(z).map_err(|source| OdeError::Coefficient { x, source });
        Ok(CoefficientValues {
            p: eval(&self.p)?,
            q: eval(&self.q)?,
            w: eval(&self.w)?,
        })
    }
}

/// Initial data `(θ, φ)` at `x = a`: θ = (cos α, sin α), φ = (sin α, −cos α)
/// as `(y, p y')` pairs.
pub fn left_init(alpha: Complex64, a: f64) -> (SlState, SlState) {
    let (c, s) = (alpha.cos(), alpha.sin());
    (SlState::new(a, c, s), SlState::new(a, s, -c))
}

/// Maps the left condition angle to the swapped condition
/// `(sin α) y(a) − (cos α) p y'(a) = 0`.
pub fn swap_alpha(alpha: Complex64) -> Complex64 {
    alpha - FRAC_PI_2
}

/// `(cβ, sβ)` for the condition `cβ y(bn) + sβ p y'(bn) = 0`.
pub fn right_bc_coefficients(
    rbc: &RightBc,
    p_at_bn: Complex64,
    bn: f64,
) -> Result<(Complex64, Complex64), ProblemError> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match rbc {
        RightBc::Dirichlet => Ok((one, zero)),
        RightBc::Angle(beta) => Ok((beta.cos(), beta.sin())),
        RightBc::ReferenceSolution { v, dv } => {
            let z = Complex64::new(bn, 0.0);
            let err = |source| ProblemError::Coefficient { which: "v", x: bn, source };
            let vb = v.eval_at(z).map_err(err)?;
            let dvb = dv.eval_at(z).map_err(err)?;
            let cb = p_at_bn * dvb;
            let sb = -vb;
            let scale = cb.norm().max(sb.norm());
            if scale == 0.0 || !scale.is_finite() {
                return Err(ProblemError::DegenerateReference(bn));
            }
            Ok((cb / scale, sb / scale))
        }
    }
}

/// Truncation points approaching `b`: `b0 * n` for infinite `b`, otherwise
/// `b − (b − a) 2^{−n}`.
pub fn default_schedule(a: f64, b: Endpoint, count: usize, b0: f64) -> Result<Vec<f64>, ProblemError> {
    if count < 2 {
        return Err(ProblemError::ScheduleTooShort(count));
    }
    Ok((1..=count)
        .map(|n| match b {
            Endpoint::Infinite => b0 * n as f64,
            Endpoint::Finite(b) => b - (b - a) * 0.5f64.powi(n as i32),
        })
        .collect())
}
