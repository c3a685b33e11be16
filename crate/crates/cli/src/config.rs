//! Run configuration: TOML schema and conversion into library types.

use std::collections::{BTreeMap, BTreeSet};

use nssl::expr::{Expr, Params};
use nssl::locate::ComplexBox;
use nssl::mfunc::Matching;
use nssl::problem::{default_schedule, Endpoint, Family, Problem, RightBc};
use nssl::Complex64;
use serde::Deserialize;

use crate::CliError;

/// A number or a complex literal such as `"1+0.5*i"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Text(String),
}

impl Scalar {
    pub fn to_complex(&self, key: &str) -> Result<Complex64, CliError> {
        match self {
            Scalar::Real(v) => Ok(Complex64::new(*v, 0.0)),
            Scalar::Text(s) => Expr::parse_closed(s)
                .and_then(|e| e.eval_at(Complex64::new(0.0, 0.0)))
                .map_err(|e| CliError::Validation(format!("{key}: {e}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Finite(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "one")]
    pub p: String,
    pub q: String,
    #[serde(default = "one")]
    pub w: String,
    #[serde(default)]
    pub params: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub a: f64,
    pub b: Bound,
    #[serde(default = "zero")]
    pub alpha: Scalar,
    /// `dirichlet`, `angle:<beta>` or `reference:<v(x)>`.
    #[serde(default = "dirichlet")]
    pub right_bc: String,
}

fn one() -> String {
    "1".into()
}

fn zero() -> Scalar {
    Scalar::Real(0.0)
}

fn dirichlet() -> String {
    "dirichlet".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub points: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub step: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    /// Integrator tolerance (absolute and relative).
    pub ode: f64,
    pub tau_conv: f64,
    pub tau_pair: f64,
    /// Relative to the box diagonal.
    pub tau_match: f64,
    pub tau_theta: f64,
    /// `midpoint` or `forward`.
    pub matching: String,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            ode: 1e-10,
            tau_conv: 1e-6,
            tau_pair: 1e-4,
            tau_match: 0.05,
            tau_theta: 1e-3,
            matching: "midpoint".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveTask {
    pub corners: [Scalar; 2],
    #[serde(default = "family_m")]
    pub family: String,
    pub b_n: Option<f64>,
}

fn family_m() -> String {
    "M".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyTask {
    pub corners: [Scalar; 2],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceTask {
    /// Corners of the search box in the rotated (`μ`) plane.
    pub corners: [Scalar; 2],
    #[serde(default)]
    pub thetas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfuncTask {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub re_count: usize,
    pub im_count: usize,
    #[serde(default = "family_m")]
    pub family: String,
    pub b_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyTask {
    pub lambda: Scalar,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    #[serde(default = "default_r_range")]
    pub r_range: [f64; 2],
    #[serde(default = "default_r_count")]
    pub r_count: usize,
    pub point_cloud: Option<String>,
}

fn default_x_points() -> usize {
    200
}

fn default_r_range() -> [f64; 2] {
    [1e-6, 1e6]
}

fn default_r_count() -> usize {
    40
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    pub solve: Option<SolveTask>,
    pub verify: Option<VerifyTask>,
    pub resonances: Option<ResonanceTask>,
    pub mfunc: Option<MfuncTask>,
    pub classify: Option<ClassifyTask>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses and schema-checks a TOML document; errors name the offending key.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Validation(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().to_string();
            // serde reports a missing field at its parent; append the field name
            let path = match msg.strip_prefix("missing field `").and_then(|m| m.strip_suffix('`')) {
                Some(field) if path == "." => field.to_string(),
                Some(field) => format!("{path}.{field}"),
                None => path,
            };
            CliError::Validation(format!("{path}: {msg}"))
        })
    }

    pub fn params(&self) -> Result<Params, CliError> {
        self.problem
            .params
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.to_complex(&format!("problem.params.{k}"))?)))
            .collect()
    }

    fn expr(&self, key: &str, src: &str, params: &Params) -> Result<Expr, CliError> {
        let declared: BTreeSet<String> = params.keys().cloned().collect();
        Expr::parse(src, &declared)
            .and_then(|e| e.bind(params))
            .map_err(|e| CliError::Validation(format!("problem.{key}: {e}")))
    }

    pub fn endpoint(&self) -> Result<Endpoint, CliError> {
        match &self.problem.b {
            Bound::Finite(v) => Ok(Endpoint::Finite(*v)),
            Bound::Named(s) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity") => Ok(Endpoint::Infinite),
            Bound::Named(s) => Err(CliError::Validation(format!("problem.b: expected a number or \"inf\", got {s:?}"))),
        }
    }

    pub fn schedule(&self) -> Result<Vec<f64>, CliError> {
        let s = &self.schedule;
        match (&s.points, s.start, s.step, s.count) {
            (Some(points), None, None, None) => Ok(points.clone()),
            (None, Some(start), Some(step), Some(count)) => Ok((0..count).map(|k| start + step * k as f64).collect()),
            (None, Some(start), None, Some(count)) => default_schedule(self.problem.a, self.endpoint()?, count, start)
                .map_err(|e| CliError::Validation(format!("schedule: {e}"))),
            _ => Err(CliError::Validation(
                "schedule: give either `points` or `start`, `count` (and optionally `step`)".into(),
            )),
        }
    }

    pub fn right_bc(&self, params: &Params) -> Result<RightBc, CliError> {
        let spec = self.problem.right_bc.trim();
        if spec.eq_ignore_ascii_case("dirichlet") {
            return Ok(RightBc::Dirichlet);
        }
        if let Some(beta) = spec.strip_prefix("angle:") {
            let beta = self.expr("right_bc", beta, params)?;
            let v = beta
                .eval_at(Complex64::new(0.0, 0.0))
                .map_err(|e| CliError::Validation(format!("problem.right_bc: {e}")))?;
            return Ok(RightBc::Angle(v));
        }
        if let Some(v) = spec.strip_prefix("reference:") {
            return Ok(RightBc::reference(self.expr("right_bc", v, params)?));
        }
        Err(CliError::Validation(format!(
            "problem.right_bc: expected dirichlet, angle:<beta> or reference:<v>, got {spec:?}"
        )))
    }

    pub fn build_problem(&self) -> Result<Problem, CliError> {
        let params = self.params()?;
        let p = self.expr("p", &self.problem.p, &params)?;
        let q = self.expr("q", &self.problem.q, &params)?;
        let w = self.expr("w", &self.problem.w, &params)?;
        let alpha = self.problem.alpha.to_complex("problem.alpha")?;
        Problem::new(
            p,
            q,
            w,
            self.problem.a,
            self.endpoint()?,
            alpha,
            self.right_bc(&params)?,
            self.schedule()?,
        )
        .map_err(|e| CliError::Validation(format!("problem: {e}")))
    }

    /// The potential `V` of a resonance run (the `q` entry; `p` and `w` must be 1).
    pub fn potential(&self) -> Result<Expr, CliError> {
        if self.problem.p.trim() != "1" || self.problem.w.trim() != "1" {
            return Err(CliError::Validation("problem: resonance runs need p = 1 and w = 1".into()));
        }
        let params = self.params()?;
        self.expr("q", &self.problem.q, &params)
    }

    pub fn matching(&self) -> Result<Matching, CliError> {
        match self.tolerances.matching.as_str() {
            "midpoint" => Ok(Matching::Fraction(0.5)),
            "forward" => Ok(Matching::Forward),
            other => Err(CliError::Validation(format!(
                "tolerances.matching: expected midpoint or forward, got {other:?}"
            ))),
        }
    }
}

pub fn parse_family(key: &str, s: &str) -> Result<Family, CliError> {
    match s {
        "M" | "m" => Ok(Family::M),
        "L" | "l" => Ok(Family::L),
        other => Err(CliError::Validation(format!("{key}: expected M or L, got {other:?}"))),
    }
}

pub fn parse_box(key: &str, corners: &[Scalar; 2]) -> Result<ComplexBox, CliError> {
    let z1 = corners[0].to_complex(&format!("{key}.corners[0]"))?;
    let z2 = corners[1].to_complex(&format!("{key}.corners[1]"))?;
    ComplexBox::from_corners(z1, z2).map_err(|e| CliError::Validation(format!("{key}.corners: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[problem]
q = "c^2*x^2"
b = "inf"
params = { c = "sqrt(1+3*i)" }

[schedule]
points = [20.0]
"#;

    #[test]
    fn parses_minimal() {
        let cfg = RunConfig::from_toml(BASE).unwrap();
        let p = cfg.build_problem().unwrap();
        let q = p.q.eval_at(Complex64::new(2.0, 0.0)).unwrap();
        assert!((q - Complex64::new(4.0, 12.0)).norm() < 1e-12);
        assert_eq!(p.schedule, vec![20.0]);
    }

    #[test]
    fn missing_q_names_key() {
        let text = BASE.replace("q = \"c^2*x^2\"\n", "");
        match RunConfig::from_toml(&text) {
            Err(CliError::Validation(m)) => assert!(m.starts_with("problem.q"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = BASE.replace("b = \"inf\"", "b = \"inf\"\ncolour = 3");
        match RunConfig::from_toml(&text) {
            Err(CliError::Validation(m)) => assert!(m.contains("colour"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schedule_forms() {
        let text = BASE.replace("points = [20.0]", "start = 5.0\nstep = 5.0\ncount = 4");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.schedule().unwrap(), vec![5.0, 10.0, 15.0, 20.0]);
        let text = BASE.replace("points = [20.0]", "points = [20.0]\ncount = 4");
        assert!(RunConfig::from_toml(&text).unwrap().schedule().is_err());
    }

    #[test]
    fn right_bc_forms() {
        let text = BASE.replace("b = \"inf\"", "b = \"inf\"\nright_bc = \"reference:exp(-x)\"");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert!(matches!(cfg.build_problem().unwrap().right_bc, RightBc::ReferenceSolution { .. }));
        let text = BASE.replace("b = \"inf\"", "b = \"inf\"\nright_bc = \"robin\"");
        assert!(RunConfig::from_toml(&text).unwrap().build_problem().is_err());
    }
}
