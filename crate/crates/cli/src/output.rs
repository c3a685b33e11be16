//! Rendering of results as aligned tables, CSV and JSON.

use std::fmt::Write as _;

use nssl::exactness::ExactnessReport;
use nssl::locate::ZeroSearch;
use nssl::numfmt::{complex, real};
use nssl::sims::NumericalRangeHull;

use crate::config::Format;
use crate::{ClassifyOutput, CliError, MfuncRow, Outcome, ResonanceOutput};

const CSV_HEADER: [&str; 6] = ["re_lambda", "im_lambda", "multiplicity", "residual", "b_n", "verdict"];

pub fn render(outcome: &Outcome, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json(outcome),
        Format::Csv => csv(outcome),
        Format::Table => Ok(table(outcome)),
    }
}

fn json(outcome: &Outcome) -> Result<String, CliError> {
    let text = match outcome {
        Outcome::Solve(v) => serde_json::to_string_pretty(v),
        Outcome::Verify(v) => serde_json::to_string_pretty(v),
        Outcome::Resonances(v) => serde_json::to_string_pretty(v),
        Outcome::Mfunc(v) => serde_json::to_string_pretty(v),
        Outcome::Classify(v) => serde_json::to_string_pretty(v),
    };
    text.map(|t| t + "\n").map_err(|e| CliError::Io(e.to_string()))
}

fn csv_writer<F>(header: &[&str], fill: F) -> Result<String, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    fill(&mut w).map_err(io)?;
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn csv(outcome: &Outcome) -> Result<String, CliError> {
    match outcome {
        Outcome::Solve(s) => csv_writer(&CSV_HEADER, |w| {
            for e in &s.estimates {
                let verdict = if e.refined { "refined" } else { "unrefined" };
                w.write_record([
                    real(e.lambda.re),
                    real(e.lambda.im),
                    e.multiplicity.to_string(),
                    real(e.residual),
                    real(e.b_n),
                    verdict.to_string(),
                ])?;
            }
            Ok(())
        }),
        Outcome::Verify(r) => {
            let mut header = CSV_HEADER.to_vec();
            header.push("family");
            csv_writer(&header, |w| {
                for row in r.m_tracks.iter().chain(&r.l_tracks) {
                    let last = row.track.entries.last().expect("non-empty track");
                    w.write_record([
                        real(row.track.limit_estimate.re),
                        real(row.track.limit_estimate.im),
                        last.multiplicity.to_string(),
                        real(last.residual),
                        real(last.b_n),
                        row.verdict.as_str().to_string(),
                        format!("{:?}", row.track.family),
                    ])?;
                }
                Ok(())
            })
        }
        Outcome::Resonances(out) => {
            let mut header = CSV_HEADER.to_vec();
            header.extend(["family", "theta", "re_mu", "im_mu", "lower_half_plane", "theta_invariant"]);
            csv_writer(&header, |w| {
                for run in &out.runs {
                    for c in run.candidates.iter().chain(&run.swapped) {
                        w.write_record([
                            real(c.lambda.re),
                            real(c.lambda.im),
                            c.multiplicity.to_string(),
                            real(c.residual),
                            real(c.b_n),
                            c.verdict.as_str().to_string(),
                            format!("{:?}", c.family),
                            real(c.theta),
                            real(c.mu.re),
                            real(c.mu.im),
                            c.lower_half_plane.to_string(),
                            c.theta_invariant.map(|b| b.to_string()).unwrap_or_default(),
                        ])?;
                    }
                }
                Ok(())
            })
        }
        Outcome::Mfunc(rows) => csv_writer(&["re_lambda", "im_lambda", "re_m", "im_m", "at_pole", "b_n"], |w| {
            for r in rows {
                let (re_m, im_m) = r.m.map(|m| (real(m.re), real(m.im))).unwrap_or_default();
                w.write_record([real(r.lambda.re), real(r.lambda.im), re_m, im_m, r.at_pole.to_string(), real(r.b_n)])?;
            }
            Ok(())
        }),
        Outcome::Classify(c) => csv_writer(
            &["solution", "b_n", "ln_l2_w", "ln_abs_sims_form", "l2_growth", "sims_growth"],
            |w| {
                for s in &c.diagnostic.solutions {
                    for (i, b) in c.diagnostic.schedule.iter().enumerate() {
                        let ln = |v: Option<&nssl::scaled::ScaledComplex>| v.map(|v| real(v.ln_norm())).unwrap_or_default();
                        w.write_record([
                            kebab(&s.kind),
                            real(*b),
                            ln(s.l2_w.get(i)),
                            ln(s.sims_form.get(i)),
                            kebab(&s.l2_growth),
                            kebab(&s.sims_growth),
                        ])?;
                    }
                }
                Ok(())
            },
        ),
    }
}

fn kebab<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Sampled `q/w + r p` values as `re,im` rows.
pub fn point_cloud_csv(hull: &NumericalRangeHull) -> Result<String, CliError> {
    csv_writer(&["re", "im", "vertex"], |w| {
        for s in &hull.samples {
            let vertex = hull.vertices.contains(s);
            w.write_record([real(s.re), real(s.im), vertex.to_string()])?;
        }
        Ok(())
    })
}

fn table(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Solve(s) => solve_table(s),
        Outcome::Verify(r) => verify_table(r),
        Outcome::Resonances(r) => resonance_table(r),
        Outcome::Mfunc(rows) => mfunc_table(rows),
        Outcome::Classify(c) => classify_table(c),
    }
}

fn solve_table(s: &ZeroSearch) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<40} {:>4} {:>18} {:>12}  status", "lambda", "mult", "residual", "b_n");
    for e in &s.estimates {
        let status = if e.refined { "refined" } else { "unrefined" };
        let _ = writeln!(
            out,
            "{:<40} {:>4} {:>18} {:>12}  {status}",
            complex(e.lambda),
            e.multiplicity,
            real(e.residual),
            real(e.b_n)
        );
    }
    let _ = writeln!(out, "total winding: {}", s.total_winding);
    out
}

fn verify_table(r: &ExactnessReport) -> String {
    let mut out = r.to_table();
    for (name, counts) in [("M", &r.m_counts), ("L", &r.l_counts)] {
        let list: Vec<String> = counts.iter().map(|(b, n)| format!("{}:{n}", real(*b))).collect();
        let _ = writeln!(out, "{name} counts (b_n:winding): {}", list.join(" "));
    }
    out
}

fn resonance_table(r: &ResonanceOutput) -> String {
    let mut out = String::new();
    for run in &r.runs {
        let _ = writeln!(out, "theta = {}", real(run.theta));
        let _ = writeln!(out, "{:<6} {:<40} {:<40} {:<17} {:<6} invariant", "family", "lambda", "mu", "verdict", "lower");
        for c in run.candidates.iter().chain(&run.swapped) {
            let star = if c.verdict == nssl::exactness::Verdict::SuspectSpurious { "*" } else { "" };
            let _ = writeln!(
                out,
                "{:<6} {:<40} {:<40} {:<17} {:<6} {}",
                format!("{:?}", c.family),
                format!("{}{star}", complex(c.lambda)),
                complex(c.mu),
                c.verdict.as_str(),
                c.lower_half_plane,
                c.theta_invariant.map(|b| b.to_string()).unwrap_or_else(|| "-".into())
            );
        }
        let _ = writeln!(out);
    }
    if let Some(kept) = &r.theta_invariant {
        let _ = writeln!(out, "theta-invariant candidates:");
        for c in kept {
            let tag = if c.genuine() { "genuine" } else { "not genuine" };
            let _ = writeln!(out, "  {:<40} {:<17} {tag}", complex(c.lambda), c.verdict.as_str());
        }
    }
    out
}

fn mfunc_table(rows: &[MfuncRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<40} {:<40}", "lambda", "m_n");
    for r in rows {
        let m = r.m.map(complex).unwrap_or_else(|| "pole".into());
        let _ = writeln!(out, "{:<40} {:<40}", complex(r.lambda), m);
    }
    out
}

fn classify_table(c: &ClassifyOutput) -> String {
    let mut out = String::new();
    let d = &c.diagnostic;
    let _ = writeln!(out, "test point: {}", complex(d.lambda));
    let _ = writeln!(out, "K = {}, eta = {}", complex(c.pair.k), real(c.pair.eta));
    let _ = writeln!(out, "samples in half-plane: {}", real(c.pair.half_plane_fraction));
    let _ = writeln!(out, "hull vertices: {}, ray directions: {:?}", c.hull.vertices.len(), c.hull.ray_directions.iter().map(|a| real(*a)).collect::<Vec<_>>());
    for s in &d.solutions {
        let _ = writeln!(out, "{}: L2_w {}, Sims form {}", kebab(&s.kind), kebab(&s.l2_growth), kebab(&s.sims_growth));
    }
    let _ = writeln!(out, "alpha condition holds: {}", d.alpha_condition);
    let _ = writeln!(out, "suggested case (heuristic): {}", d.suggested.as_str());
    out
}
