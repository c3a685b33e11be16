//! Boundary-condition swap test for spurious eigenvalues.
//!
//! Eigenvalues of the truncated problems are computed twice, once with the
//! left condition `α` (family M) and once with the swapped condition (family
//! L), over a schedule of truncation points. Limits that appear in both
//! families are suspect: a genuine eigenvalue of the singular problem cannot in
//! general survive a change of the regular boundary condition. Limits present
//! in only one family are certified.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::locate::{find_eigenvalues, order_key, winding_number, ComplexBox, EigenvalueEstimate, Evaluator, FindOptions, LocateError};
use crate::mfunc::compute_miss_distance;
use crate::numfmt;
use crate::problem::{Family, Problem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactnessError {
    #[error("tracking needs at least two schedule points, got {0}")]
    TooFewSchedulePoints(usize),
    #[error(transparent)]
    Locate(#[from] LocateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ExactCertified,
    SuspectSpurious,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ExactCertified => "exact-certified",
            Verdict::SuspectSpurious => "suspect-spurious",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Eigenvalue estimates of one family followed across truncation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrack {
    pub family: Family,
    pub entries: Vec<EigenvalueEstimate>,
    pub limit_estimate: Complex64,
    pub converged: bool,
    /// Last successive difference; absent for single-entry tracks.
    pub cauchy_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactnessOptions {
    /// Matching gate between consecutive truncations, relative to the box diagonal.
    pub tau_match_rel: f64,
    /// Convergence threshold is `tau_conv * (1 + |λ|)`.
    pub tau_conv: f64,
    /// Pairing threshold is `max(10 τ_conv, tau_pair * (1 + |μ|))`.
    pub tau_pair: f64,
}

impl Default for ExactnessOptions {
    fn default() -> Self {
        Self {
            tau_match_rel: 0.05,
            tau_conv: 1e-6,
            tau_pair: 1e-4,
        }
    }
}

impl ExactnessOptions {
    pub fn conv_threshold(&self, lambda: Complex64) -> f64 {
        self.tau_conv * (1.0 + lambda.norm())
    }

    pub fn pair_threshold(&self, mu: Complex64) -> f64 {
        (10.0 * self.conv_threshold(mu)).max(self.tau_pair * (1.0 + mu.norm()))
    }
}

fn finish_track(family: Family, entries: Vec<EigenvalueEstimate>, opts: &ExactnessOptions) -> ConvergenceTrack {
    let last = entries.last().expect("non-empty track").lambda;
    let gap = (entries.len() >= 2).then(|| (last - entries[entries.len() - 2].lambda).norm());
    ConvergenceTrack {
        family,
        converged: gap.is_some_and(|g| g < opts.conv_threshold(last)),
        cauchy_gap: gap,
        limit_estimate: last,
        entries,
    }
}

/// Links estimates at consecutive truncation points by greedy nearest-neighbour
/// matching within the gate `tau_match`.
pub fn track_eigenvalues(
    per_bn: &[Vec<EigenvalueEstimate>],
    family: Family,
    tau_match: f64,
    opts: &ExactnessOptions,
) -> Result<Vec<ConvergenceTrack>, ExactnessError> {
    if per_bn.len() < 2 {
        return Err(ExactnessError::TooFewSchedulePoints(per_bn.len()));
    }
    let mut done: Vec<Vec<EigenvalueEstimate>> = Vec::new();
    let mut active: Vec<Vec<EigenvalueEstimate>> = per_bn[0].iter().map(|e| vec![*e]).collect();
    for level in &per_bn[1..] {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, track) in active.iter().enumerate() {
            let tail = track.last().expect("non-empty").lambda;
            for (ei, e) in level.iter().enumerate() {
                let d = (e.lambda - tail).norm();
                if d < tau_match {
                    pairs.push((d, ti, ei));
                }
            }
        }
        pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let mut track_used = vec![false; active.len()];
        let mut est_used = vec![false; level.len()];
        let mut extended: Vec<Option<usize>> = vec![None; active.len()];
        for (_, ti, ei) in pairs {
            if !track_used[ti] && !est_used[ei] {
                track_used[ti] = true;
                est_used[ei] = true;
                extended[ti] = Some(ei);
            }
        }
        let mut next = Vec::new();
        for (ti, mut track) in active.into_iter().enumerate() {
            match extended[ti] {
                Some(ei) => {
                    track.push(level[ei]);
                    next.push(track);
                }
                None => done.push(track),
            }
        }
        for (ei, e) in level.iter().enumerate() {
            if !est_used[ei] {
                next.push(vec![*e]);
            }
        }
        active = next;
    }
    done.extend(active);
    let mut tracks: Vec<ConvergenceTrack> = done.into_iter().map(|t| finish_track(family, t, opts)).collect();
    sort_tracks(&mut tracks);
    Ok(tracks)
}

/// One-entry tracks for a single truncation point: a refined estimate is
/// taken as converged, since there is no sequence to test.
pub fn single_point_tracks(estimates: &[EigenvalueEstimate], family: Family) -> Vec<ConvergenceTrack> {
    let mut tracks: Vec<ConvergenceTrack> = estimates
        .iter()
        .map(|e| ConvergenceTrack {
            family,
            entries: vec![*e],
            limit_estimate: e.lambda,
            converged: e.refined,
            cauchy_gap: None,
        })
        .collect();
    sort_tracks(&mut tracks);
    tracks
}

fn sort_tracks(tracks: &mut [ConvergenceTrack]) {
    tracks.sort_by(|a, b| {
        order_key(a.limit_estimate)
            .partial_cmp(&order_key(b.limit_estimate))
            .expect("finite limits")
    });
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedTrack {
    pub track: ConvergenceTrack,
    pub verdict: Verdict,
    /// Index of the matching track of the other family, for suspect limits.
    pub paired_track: Option<usize>,
    /// Distance to the nearest converged limit of the other family.
    pub pair_distance: Option<f64>,
}

fn classify_side(tracks: &[ConvergenceTrack], others: &[ConvergenceTrack], opts: &ExactnessOptions) -> Vec<ClassifiedTrack> {
    tracks
        .iter()
        .map(|t| {
            let nearest = others
                .iter()
                .enumerate()
                .filter(|(_, o)| o.converged)
                .map(|(i, o)| (i, (o.limit_estimate - t.limit_estimate).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
            let (verdict, paired_track) = if !t.converged {
                (Verdict::Inconclusive, None)
            } else {
                match nearest {
                    Some((i, d)) if d < opts.pair_threshold(t.limit_estimate) => (Verdict::SuspectSpurious, Some(i)),
                    _ => (Verdict::ExactCertified, None),
                }
            };
            ClassifiedTrack {
                track: t.clone(),
                verdict,
                paired_track,
                pair_distance: nearest.map(|(_, d)| d),
            }
        })
        .collect()
}

/// Total winding decreased between consecutive truncation points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionWarning {
    pub family: Family,
    pub bx: ComplexBox,
    pub b_prev: f64,
    pub count_prev: i64,
    pub b_next: f64,
    pub count_next: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub bx: ComplexBox,
    pub schedule: Vec<f64>,
    pub m_tracks: Vec<ClassifiedTrack>,
    pub l_tracks: Vec<ClassifiedTrack>,
    /// `(b_n, total winding)` per family.
    pub m_counts: Vec<(f64, i64)>,
    pub l_counts: Vec<(f64, i64)>,
    pub missing_eigenvalue_warnings: Vec<InclusionWarning>,
}

/// Verdicts for both families; each side is paired against the other.
pub fn classify(
    m_tracks: &[ConvergenceTrack],
    l_tracks: &[ConvergenceTrack],
    opts: &ExactnessOptions,
) -> (Vec<ClassifiedTrack>, Vec<ClassifiedTrack>) {
    (classify_side(m_tracks, l_tracks, opts), classify_side(l_tracks, m_tracks, opts))
}

pub fn inclusion_warnings(family: Family, bx: &ComplexBox, counts: &[(f64, i64)]) -> Vec<InclusionWarning> {
    counts
        .windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .map(|w| InclusionWarning {
            family,
            bx: *bx,
            b_prev: w[0].0,
            count_prev: w[0].1,
            b_next: w[1].0,
            count_next: w[1].1,
        })
        .collect()
}

/// Winding of the miss-distance around `bx` at every schedule point.
pub fn inclusion_monitor(problem: &Problem, bx: &ComplexBox, opts: &FindOptions) -> Result<Vec<InclusionWarning>, ExactnessError> {
    let counts = problem
        .schedule
        .par_iter()
        .map(|&b_n| {
            let eval = Evaluator::new(|lambda| {
                compute_miss_distance(problem, b_n, lambda, &opts.shooting)
                    .map(|d| d.scaled())
                    .map_err(|e| LocateError::Evaluation {
                        lambda,
                        message: e.to_string(),
                    })
            });
            let mut searched = *bx;
            let mut attempt = 0;
            loop {
                match winding_number(&eval, &searched, &opts.locate.winding) {
                    Ok(w) => return Ok((b_n, w)),
                    Err(LocateError::NearZeroOnContour { .. }) if attempt < opts.locate.perturb_retries => {
                        attempt += 1;
                        searched = bx.dilate(0.01 * bx.diagonal() * attempt as f64);
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect::<Result<Vec<_>, LocateError>>()?;
    Ok(inclusion_warnings(Family::M, bx, &counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub find: FindOptions,
    pub exactness: ExactnessOptions,
}

/// Runs both families over the problem's schedule and classifies every limit.
/// A one-point schedule yields one-entry tracks.
pub fn verify(problem: &Problem, bx: &ComplexBox, opts: &VerifyOptions) -> Result<ExactnessReport, ExactnessError> {
    let jobs: Vec<(Family, f64)> = [Family::M, Family::L]
        .iter()
        .flat_map(|&f| problem.schedule.iter().map(move |&b| (f, b)))
        .collect();
    let searches = jobs
        .par_iter()
        .map(|&(family, b_n)| find_eigenvalues(&problem.for_family(family), b_n, bx, &opts.find))
        .collect::<Result<Vec<_>, LocateError>>()?;
    let n = problem.schedule.len();
    let (m_search, l_search) = searches.split_at(n);

    let tau_match = opts.exactness.tau_match_rel * bx.diagonal();
    let tracks = |family: Family, s: &[crate::locate::ZeroSearch]| -> Result<Vec<ConvergenceTrack>, ExactnessError> {
        let per_bn: Vec<Vec<EigenvalueEstimate>> = s.iter().map(|z| z.estimates.clone()).collect();
        if per_bn.len() == 1 {
            Ok(single_point_tracks(&per_bn[0], family))
        } else {
            track_eigenvalues(&per_bn, family, tau_match, &opts.exactness)
        }
    };
    let m_tracks = tracks(Family::M, m_search)?;
    let l_tracks = tracks(Family::L, l_search)?;
    let (m_tracks, l_tracks) = classify(&m_tracks, &l_tracks, &opts.exactness);

    let counts = |s: &[crate::locate::ZeroSearch]| -> Vec<(f64, i64)> {
        problem.schedule.iter().zip(s).map(|(&b, z)| (b, z.total_winding)).collect()
    };
    let m_counts = counts(m_search);
    let l_counts = counts(l_search);
    let mut warnings = inclusion_warnings(Family::M, bx, &m_counts);
    warnings.extend(inclusion_warnings(Family::L, bx, &l_counts));

    Ok(ExactnessReport {
        bx: *bx,
        schedule: problem.schedule.clone(),
        m_tracks,
        l_tracks,
        m_counts,
        l_counts,
        missing_eigenvalue_warnings: warnings,
    })
}

impl ExactnessReport {
    pub fn suspects(&self) -> impl Iterator<Item = &ClassifiedTrack> {
        self.m_tracks
            .iter()
            .chain(&self.l_tracks)
            .filter(|t| t.verdict == Verdict::SuspectSpurious)
    }

    /// Aligned text table; suspect-spurious limits carry a `*`.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (name, rows) in [("M", &self.m_tracks), ("L", &self.l_tracks)] {
            let _ = writeln!(out, "Eigenvalues of {name}_n");
            let _ = writeln!(out, "{:<40} {:>18} {:>18}  verdict", "lambda", "gap", "pair distance");
            for row in rows {
                let star = if row.verdict == Verdict::SuspectSpurious { "*" } else { " " };
                let lam = format!("{}{star}", numfmt::complex(row.track.limit_estimate));
                let gap = row.track.cauchy_gap.map(numfmt::real).unwrap_or_else(|| "-".into());
                let pd = row.pair_distance.map(numfmt::real).unwrap_or_else(|| "-".into());
                let _ = writeln!(out, "{lam:<40} {gap:>18} {pd:>18}  {}", row.verdict.as_str());
            }
            let _ = writeln!(out);
        }
        for w in &self.missing_eigenvalue_warnings {
            let _ = writeln!(
                out,
                "warning: {:?} count fell from {} at b_n={} to {} at b_n={}",
                w.family,
                w.count_prev,
                numfmt::real(w.b_prev),
                w.count_next,
                numfmt::real(w.b_next)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(re: f64, im: f64, b_n: f64) -> EigenvalueEstimate {
        EigenvalueEstimate {
            lambda: Complex64::new(re, im),
            multiplicity: 1,
            residual: 0.0,
            b_n,
            refined: true,
        }
    }

    fn track(re: f64, im: f64, family: Family) -> ConvergenceTrack {
        let opts = ExactnessOptions::default();
        finish_track(family, vec![est(re, im, 15.0), est(re, im, 20.0)], &opts)
    }

    #[test]
    fn table_one_column_converges() {
        let per_bn = vec![
            vec![est(24.21311, 14.10915, 5.0)],
            vec![est(24.21335, 14.11107, 10.0)],
            vec![est(24.21335, 14.11108, 15.0)],
            vec![est(24.21335, 14.11108, 20.0)],
        ];
        let opts = ExactnessOptions::default();
        let tracks = track_eigenvalues(&per_bn, Family::M, 5.0, &opts).unwrap();
        assert_eq!(tracks.len(), 1);
        assert!(tracks[0].converged);
        assert_eq!(tracks[0].limit_estimate, Complex64::new(24.21335, 14.11108));
        assert_eq!(tracks[0].entries.len(), 4);
    }

    #[test]
    fn single_point_rejected() {
        let r = track_eigenvalues(&[vec![est(1.0, 0.0, 1.0)]], Family::M, 1.0, &ExactnessOptions::default());
        assert_eq!(r, Err(ExactnessError::TooFewSchedulePoints(1)));
    }

    #[test]
    fn gate_separates_far_estimates() {
        let per_bn = vec![vec![est(1.0, 0.0, 5.0)], vec![est(50.0, 0.0, 10.0)]];
        let tracks = track_eigenvalues(&per_bn, Family::M, 2.0, &ExactnessOptions::default()).unwrap();
        assert_eq!(tracks.len(), 2);
        assert!(tracks.iter().all(|t| !t.converged && t.entries.len() == 1));
    }

    #[test]
    fn greedy_prefers_nearest() {
        let per_bn = vec![
            vec![est(0.0, 0.0, 1.0), est(1.0, 0.0, 1.0)],
            vec![est(0.9, 0.0, 2.0), est(0.1, 0.0, 2.0)],
        ];
        let tracks = track_eigenvalues(&per_bn, Family::M, 2.0, &ExactnessOptions::default()).unwrap();
        assert_eq!(tracks.len(), 2);
        assert_eq!(tracks[0].entries[1].lambda.re, 0.1);
        assert_eq!(tracks[1].entries[1].lambda.re, 0.9);
    }

    #[test]
    fn near_coincident_pair_is_suspect() {
        let m = vec![track(73.809759, 74.921450, Family::M), track(4.3278454, 3.1193175, Family::M)];
        let l = vec![track(73.809759, 74.921449, Family::L), track(1.4426265, 1.0397661, Family::L)];
        let (mv, lv) = classify(&m, &l, &ExactnessOptions::default());
        assert_eq!(mv[0].verdict, Verdict::SuspectSpurious);
        assert_eq!(mv[0].paired_track, Some(0));
        assert_eq!(mv[1].verdict, Verdict::ExactCertified);
        assert_eq!(lv[0].verdict, Verdict::SuspectSpurious);
        assert_eq!(lv[1].verdict, Verdict::ExactCertified);
    }

    #[test]
    fn empty_other_family_certifies() {
        let m = vec![track(1.0, 1.0, Family::M)];
        let (mv, _) = classify(&m, &[], &ExactnessOptions::default());
        assert_eq!(mv[0].verdict, Verdict::ExactCertified);
        assert_eq!(mv[0].pair_distance, None);
    }

    #[test]
    fn unconverged_is_inconclusive() {
        let opts = ExactnessOptions::default();
        let t = finish_track(Family::M, vec![est(1.0, 0.0, 1.0), est(1.1, 0.0, 2.0)], &opts);
        let (mv, _) = classify(&[t], &[], &opts);
        assert_eq!(mv[0].verdict, Verdict::Inconclusive);
    }

    #[test]
    fn decreasing_count_warns() {
        let bx = ComplexBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let w = inclusion_warnings(Family::M, &bx, &[(5.0, 3), (10.0, 3), (15.0, 2), (20.0, 4)]);
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].count_prev, w[0].count_next), (3, 2));
        assert!(inclusion_warnings(Family::M, &bx, &[(5.0, 0), (10.0, 0)]).is_empty());
    }
}
