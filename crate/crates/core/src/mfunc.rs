//! Truncated Titchmarsh–Weyl functions and the shooting miss-distance.
//!
//! With `θ`, `φ` the solutions fixed by the left boundary angle and
//! `(cβ, sβ)` the right boundary coefficients at `b_n`,
//!
//! ```text
//! m_n(λ) = −(cβ θ(b_n) + sβ pθ'(b_n)) / (cβ φ(b_n) + sβ pφ'(b_n))
//! D(λ)   =   cβ φ(b_n) + sβ pφ'(b_n)
//! ```
//!
//! `D` is entire in λ and its zeros are the eigenvalues of the truncated
//! operator. It is evaluated as the Wronskian `[φ, χ]` at a matching point,
//! where `χ` is shot backwards from `b_n` with data `(−sβ, cβ)`; the
//! Wronskian is constant in `x` and equals `D` at `b_n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{self, cumulative_gauss, Coefficients, OdeError, SlState, Tolerances, Trajectory};
use crate::problem::{left_init, Problem, ProblemError};
use crate::scaled::ScaledComplex;

/// Relative size of the m-function denominator below which λ counts as a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MfuncError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("λ = {0} is a pole of m_n")]
    Pole(Complex64),
}

/// Where the left and right shots meet when evaluating the miss-distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    /// Shoot from `a` only and evaluate the condition at `b_n`.
    Forward,
    /// Meet at `a + fraction (b_n − a)`.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    pub tol: Tolerances,
    pub matching: Matching,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            matching: Matching::Fraction(0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MValue {
    pub value: Complex64,
    pub at_pole: bool,
    pub b_n: f64,
    pub lambda: Complex64,
}

/// `D(λ) = value · exp(log_scale)` with `|value|` of unit order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissDistance {
    pub value: Complex64,
    pub log_scale: f64,
    pub lambda: Complex64,
    pub b_n: f64,
}

impl MissDistance {
    pub fn scaled(&self) -> ScaledComplex {
        ScaledComplex::new(self.value, self.log_scale)
    }
}

/// `θ` and `φ` at `b_n` for the problem's left angle.
pub fn shoot_fundamental(
    problem: &Problem,
    b_n: f64,
    lambda: Complex64,
    tol: Tolerances,
) -> Result<(SlState, SlState), OdeError> {
    let (th0, ph0) = left_init(problem.alpha, problem.a);
    let th = ode::propagate(problem, lambda, th0, b_n, tol)?;
    let ph = ode::propagate(problem, lambda, ph0, b_n, tol)?;
    Ok((th, ph))
}

fn bc_form(cb: Complex64, sb: Complex64, s: &SlState) -> ScaledComplex {
    ScaledComplex::new(cb * s.y + sb * s.py, s.log_scale)
}

pub fn compute_mn(problem: &Problem, b_n: f64, lambda: Complex64, tol: Tolerances) -> Result<MValue, MfuncError> {
    let (cb, sb) = problem.right_bc_coefficients(b_n)?;
    let (th, ph) = shoot_fundamental(problem, b_n, lambda, tol)?;
    let num = bc_form(cb, sb, &th);
    let den = bc_form(cb, sb, &ph);
    let coeff_size = cb.norm().max(sb.norm());
    let at_pole = den.value.norm() < POLE_THRESHOLD * ph.magnitude() * coeff_size;
    let value = if den.is_zero() {
        Complex64::new(f64::INFINITY, f64::INFINITY)
    } else {
        -(num * den.recip()).to_complex()
    };
    Ok(MValue {
        value,
        at_pole,
        b_n,
        lambda,
    })
}

/// `ℓ_n`, the m-function of the swapped left condition.
pub fn compute_ln(problem: &Problem, b_n: f64, lambda: Complex64, tol: Tolerances) -> Result<MValue, MfuncError> {
    compute_mn(&problem.for_family(crate::problem::Family::L), b_n, lambda, tol)
}

pub fn compute_miss_distance(
    problem: &Problem,
    b_n: f64,
    lambda: Complex64,
    opts: &ShootingOptions,
) -> Result<MissDistance, MfuncError> {
    let (cb, sb) = problem.right_bc_coefficients(b_n)?;
    let (_, ph0) = left_init(problem.alpha, problem.a);
    let d = match opts.matching {
        Matching::Forward => {
            let ph = ode::propagate(problem, lambda, ph0, b_n, opts.tol)?;
            let n = ph.magnitude();
            ScaledComplex::new((cb * ph.y + sb * ph.py) / n, ph.log_scale + n.ln())
        }
        Matching::Fraction(f) => {
            let xm = problem.a + f.clamp(0.0, 1.0) * (b_n - problem.a);
            let ph = ode::propagate(problem, lambda, ph0, xm, opts.tol)?;
            let chi0 = SlState::new(b_n, -sb, cb);
            let chi = ode::propagate(problem, lambda, chi0, xm, opts.tol)?;
            let n = ph.magnitude() * chi.magnitude();
            ScaledComplex::new(
                (ph.y * chi.py - ph.py * chi.y) / n,
                ph.log_scale + chi.log_scale + n.ln(),
            )
        }
    };
    Ok(MissDistance {
        value: d.value,
        log_scale: d.log_scale,
        lambda,
        b_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationCheck {
    pub direct: Complex64,
    pub via_formula: Complex64,
    pub discrepancy: f64,
}

fn recorded_pair(problem: &Problem, b_n: f64, lambda: Complex64, tol: Tolerances) -> Result<(Trajectory, Trajectory), OdeError> {
    let (th0, ph0) = left_init(problem.alpha, problem.a);
    Ok((
        ode::propagate_recorded(problem, lambda, th0, b_n, tol)?,
        ode::propagate_recorded(problem, lambda, ph0, b_n, tol)?,
    ))
}

/// Compares `m_n(λ)` computed directly with its value rebuilt from
/// `m_n(λ')` and the integrals `∫ w θ(·,λ) ψ_n(·,λ')`, `∫ w φ(·,λ) ψ_n(·,λ')`
/// where `ψ_n = θ + m_n(λ') φ`.
pub fn continuation_check(
    problem: &Problem,
    b_n: f64,
    lambda_ref: Complex64,
    lambda: Complex64,
    tol: Tolerances,
) -> Result<ContinuationCheck, MfuncError> {
    let m_ref = compute_mn(problem, b_n, lambda_ref, tol)?;
    if m_ref.at_pole {
        return Err(MfuncError::Pole(lambda_ref));
    }
    let direct = compute_mn(problem, b_n, lambda, tol)?;
    if direct.at_pole {
        return Err(MfuncError::Pole(lambda));
    }

    let (th, ph) = recorded_pair(problem, b_n, lambda, tol)?;
    let (th_r, ph_r) = recorded_pair(problem, b_n, lambda_ref, tol)?;
    let mut breaks: Vec<f64> = [&th, &ph, &th_r, &ph_r]
        .iter()
        .flat_map(|t| t.breakpoints())
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let m_r = ScaledComplex::from_complex(m_ref.value);
    let mut eval_err: Option<OdeError> = None;
    let mut integrand = |x: f64, first: &Trajectory| -> ScaledComplex {
        let w = match problem.at(x) {
            Ok(c) => c.w,
            Err(e) => {
                eval_err.get_or_insert(e);
                return ScaledComplex::ZERO;
            }
        };
        let psi = th_r.eval(x).y_scaled() + m_r * ph_r.eval(x).y_scaled();
        first.eval(x).y_scaled() * psi * w
    };
    let i_theta = *cumulative_gauss(&breaks, |x| integrand(x, &th)).last().expect("nonempty");
    let i_phi = *cumulative_gauss(&breaks, |x| integrand(x, &ph)).last().expect("nonempty");
    if let Some(e) = eval_err {
        return Err(e.into());
    }

    let dl = lambda - lambda_ref;
    let via_formula = if dl == Complex64::new(0.0, 0.0) {
        m_ref.value
    } else {
        let num = m_r - i_theta * dl;
        let den = ScaledComplex::from_complex(Complex64::new(1.0, 0.0)) + i_phi * dl;
        (num * den.recip()).to_complex()
    };
    let discrepancy = (via_formula - direct.value).norm() / direct.value.norm().max(f64::MIN_POSITIVE);
    Ok(ContinuationCheck {
        direct: direct.value,
        via_formula,
        discrepancy,
    })
}

/// Largest relative Wronskian defect `|p(θφ' − θ'φ) + 1|` over the θ mesh,
/// measured against the size of the two products being subtracted.
pub fn wronskian_defect(problem: &Problem, b_n: f64, lambda: Complex64, tol: Tolerances) -> Result<f64, MfuncError> {
    let (th, ph) = recorded_pair(problem, b_n, lambda, tol)?;
    let mut worst: f64 = 0.0;
    for s in &th.mesh {
        let f = ph.eval(s.x);
        let a = s.y_scaled() * f.py_scaled();
        let b = s.py_scaled() * f.y_scaled();
        let w = a - b;
        let size = a.ln_norm().max(b.ln_norm()).exp().max(1.0);
        let defect = (w.to_complex() + 1.0).norm() / size;
        worst = worst.max(defect);
    }
    Ok(worst)
}
