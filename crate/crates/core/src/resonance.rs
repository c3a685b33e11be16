//! Resonances by complex scaling.
//!
//! With `x -> x e^{iθ}` the equation `-y'' + V y = λ y` becomes
//! `-z'' + e^{2iθ} V(x e^{iθ}) z = μ z` with `μ = e^{2iθ} λ`. Resonances of the
//! original problem appear as eigenvalues of the scaled one whose image
//! `e^{-2iθ} μ` does not move with `θ`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactness::{verify, ExactnessError, ExactnessReport, Verdict, VerifyOptions};
use crate::expr::Expr;
use crate::locate::{order_key, ComplexBox};
use crate::problem::{Family, Problem, ProblemError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResonanceError {
    #[error("rotation angle {0} outside [0, π/2)")]
    ThetaOutOfRange(f64),
    #[error("the θ-invariance filter needs at least two distinct angles")]
    NeedTwoThetas,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Exactness(#[from] ExactnessError),
}

/// `p = 1`, `w = 1`, `q(x) = e^{2iθ} V(x e^{iθ})`; everything else from `base`.
pub fn scale_problem(v: &Expr, theta: f64, base: &Problem) -> Result<Problem, ResonanceError> {
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(ResonanceError::ThetaOutOfRange(theta));
    }
    let rot = Complex64::from_polar(1.0, theta);
    let q = if theta == 0.0 {
        v.clone()
    } else {
        let arg = Expr::Mul(Box::new(Expr::Var), Box::new(Expr::Num(rot)));
        Expr::Mul(Box::new(Expr::Num(rot * rot)), Box::new(v.substitute_var(&arg)))
    };
    Ok(Problem::new(
        Expr::num(1.0),
        q,
        Expr::num(1.0),
        base.a,
        base.b,
        base.alpha,
        base.right_bc.clone(),
        base.schedule.clone(),
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCandidate {
    /// Unrotated plane.
    pub lambda: Complex64,
    /// Rotated plane, `μ = e^{2iθ} λ`.
    pub mu: Complex64,
    pub theta: f64,
    pub family: Family,
    pub multiplicity: i64,
    pub residual: f64,
    pub b_n: f64,
    pub verdict: Verdict,
    /// Set by [`theta_invariance_filter`]; `None` before filtering.
    pub theta_invariant: Option<bool>,
    pub lower_half_plane: bool,
}

impl ResonanceCandidate {
    pub fn genuine(&self) -> bool {
        self.lower_half_plane && self.theta_invariant == Some(true) && self.verdict == Verdict::ExactCertified
    }
}

/// One scaled run: the exactness report in the `μ` plane plus the mapped candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRun {
    pub theta: f64,
    pub report: ExactnessReport,
    /// Limits for the base left condition.
    pub candidates: Vec<ResonanceCandidate>,
    /// Limits for the swapped left condition.
    pub swapped: Vec<ResonanceCandidate>,
}

pub fn rotate_back(mu: Complex64, theta: f64) -> Complex64 {
    mu * Complex64::from_polar(1.0, -2.0 * theta)
}

/// Eigenvalues of the scaled problem in `box_mu`, tested for exactness and mapped back.
pub fn find_resonances(
    v: &Expr,
    theta: f64,
    box_mu: &ComplexBox,
    base: &Problem,
    opts: &VerifyOptions,
) -> Result<ResonanceRun, ResonanceError> {
    let scaled = scale_problem(v, theta, base)?;
    let report = verify(&scaled, box_mu, opts)?;
    let map = |rows: &[crate::exactness::ClassifiedTrack], family: Family| -> Vec<ResonanceCandidate> {
        let mut out: Vec<ResonanceCandidate> = rows
            .iter()
            .map(|row| {
                let mu = row.track.limit_estimate;
                let lambda = rotate_back(mu, theta);
                let last = row.track.entries.last().expect("non-empty track");
                ResonanceCandidate {
                    lambda,
                    mu,
                    theta,
                    family,
                    multiplicity: last.multiplicity,
                    residual: last.residual,
                    b_n: last.b_n,
                    verdict: row.verdict,
                    theta_invariant: None,
                    lower_half_plane: lambda.im <= 0.0,
                }
            })
            .collect();
        out.sort_by(|a, b| order_key(a.lambda).partial_cmp(&order_key(b.lambda)).expect("finite"));
        out
    };
    Ok(ResonanceRun {
        theta,
        candidates: map(&report.m_tracks, Family::M),
        swapped: map(&report.l_tracks, Family::L),
        report,
    })
}

/// Runs every angle concurrently.
pub fn find_resonances_multi(
    v: &Expr,
    thetas: &[f64],
    box_mu: &ComplexBox,
    base: &Problem,
    opts: &VerifyOptions,
) -> Result<Vec<ResonanceRun>, ResonanceError> {
    thetas
        .par_iter()
        .map(|&t| find_resonances(v, t, box_mu, base, opts))
        .collect()
}

/// Base-condition candidates of the smallest-angle run that have a partner
/// within `tau_rel * (1 + |λ|)` in every other run.
pub fn theta_invariance_filter(runs: &[ResonanceRun], tau_rel: f64) -> Result<Vec<ResonanceCandidate>, ResonanceError> {
    let mut thetas: Vec<f64> = runs.iter().map(|r| r.theta).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    if thetas.len() < 2 {
        return Err(ResonanceError::NeedTwoThetas);
    }
    let first = runs
        .iter()
        .min_by(|a, b| a.theta.total_cmp(&b.theta))
        .expect("non-empty");
    Ok(first
        .candidates
        .iter()
        .filter(|c| {
            let tau = tau_rel * (1.0 + c.lambda.norm());
            runs.iter()
                .all(|r| r.candidates.iter().any(|o| (o.lambda - c.lambda).norm() < tau))
        })
        .map(|c| ResonanceCandidate {
            theta_invariant: Some(true),
            ..*c
        })
        .collect())
}

/// Marks every base candidate of every run with its θ-invariance flag.
pub fn mark_theta_invariance(runs: &mut [ResonanceRun], tau_rel: f64) -> Result<(), ResonanceError> {
    theta_invariance_filter(runs, tau_rel)?;
    let all: Vec<Vec<Complex64>> = runs.iter().map(|r| r.candidates.iter().map(|c| c.lambda).collect()).collect();
    for run in runs.iter_mut() {
        for c in &mut run.candidates {
            let tau = tau_rel * (1.0 + c.lambda.norm());
            c.theta_invariant = Some(all.iter().all(|other| other.iter().any(|l| (l - c.lambda).norm() < tau)));
        }
    }
    Ok(())
}
