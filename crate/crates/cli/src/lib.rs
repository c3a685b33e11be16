//! Command-line front end: `nssl <solve|verify|resonances|mfunc|classify> --config run.toml`.
//!
//! Exit status is 0 on success, 1 for invalid input and 2 when a numerical
//! step fails.

pub mod config;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nssl::exactness::{verify, ExactnessOptions, ExactnessReport, VerifyOptions};
use nssl::locate::{find_eigenvalues, FindOptions, ZeroSearch};
use nssl::mfunc::{compute_mn, ShootingOptions};
use nssl::ode::Tolerances;
use nssl::resonance::{find_resonances_multi, mark_theta_invariance, theta_invariance_filter, ResonanceCandidate, ResonanceRun};
use nssl::sims::{admissible_pair, case_diagnostic, log_grid, sample_hull, AdmissiblePair, CaseDiagnostic, NumericalRangeHull};
use nssl::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use config::{parse_box, parse_family, Format, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nssl", version, about = "Eigenvalues of non-selfadjoint Sturm-Liouville problems by interval truncation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides `output.path`; standard output when neither is set.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of one truncated problem inside a box.
    Solve(Common),
    /// Boundary-condition swap test over the truncation schedule.
    Verify(Common),
    /// Resonances by complex scaling.
    Resonances {
        #[command(flatten)]
        common: Common,
        /// Rotation angle; repeat for the invariance filter. Overrides `resonances.thetas`.
        #[arg(long = "theta")]
        theta: Vec<f64>,
    },
    /// m-function on a grid of λ values.
    Mfunc(Common),
    /// Sims-classification diagnostics.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Writes the sampled numerical range as CSV. Overrides `classify.point_cloud`.
        #[arg(long)]
        point_cloud: Option<PathBuf>,
    },
}

/// `m_n(λ)` at one grid point; `m` is absent at a pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfuncRow {
    pub lambda: Complex64,
    pub m: Option<Complex64>,
    pub at_pole: bool,
    pub b_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOutput {
    pub runs: Vec<ResonanceRun>,
    /// Present when two or more angles were run.
    pub theta_invariant: Option<Vec<ResonanceCandidate>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutput {
    pub hull: NumericalRangeHull,
    pub pair: AdmissiblePair,
    pub diagnostic: CaseDiagnostic,
}

/// Results of one subcommand, ready to render.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Solve(ZeroSearch),
    Verify(ExactnessReport),
    Resonances(ResonanceOutput),
    Mfunc(Vec<MfuncRow>),
    Classify(ClassifyOutput),
}

fn numerical<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

fn missing(section: &str) -> CliError {
    CliError::Validation(format!("{section}: section required for this subcommand"))
}

fn options(cfg: &RunConfig) -> Result<VerifyOptions, CliError> {
    let t = &cfg.tolerances;
    let mut find = FindOptions {
        shooting: ShootingOptions {
            tol: Tolerances::uniform(t.ode),
            matching: cfg.matching()?,
        },
        ..FindOptions::default()
    };
    find.locate.refine_rel = find.locate.refine_rel.max(t.ode);
    Ok(VerifyOptions {
        find,
        exactness: ExactnessOptions {
            tau_match_rel: t.tau_match,
            tau_conv: t.tau_conv,
            tau_pair: t.tau_pair,
        },
    })
}

pub fn solve(cfg: &RunConfig) -> Result<ZeroSearch, CliError> {
    let task = cfg.solve.as_ref().ok_or_else(|| missing("solve"))?;
    let problem = cfg.build_problem()?;
    let family = parse_family("solve.family", &task.family)?;
    let bx = parse_box("solve", &task.corners)?;
    let b_n = task.b_n.unwrap_or_else(|| problem.max_bn());
    let opts = options(cfg)?;
    find_eigenvalues(&problem.for_family(family), b_n, &bx, &opts.find).map_err(numerical)
}

pub fn run_verify(cfg: &RunConfig) -> Result<ExactnessReport, CliError> {
    let task = cfg.verify.as_ref().ok_or_else(|| missing("verify"))?;
    let problem = cfg.build_problem()?;
    let bx = parse_box("verify", &task.corners)?;
    verify(&problem, &bx, &options(cfg)?).map_err(numerical)
}

pub fn resonances(cfg: &RunConfig, thetas: &[f64]) -> Result<ResonanceOutput, CliError> {
    let task = cfg.resonances.as_ref().ok_or_else(|| missing("resonances"))?;
    let thetas = if thetas.is_empty() { task.thetas.clone() } else { thetas.to_vec() };
    if thetas.is_empty() {
        return Err(CliError::Validation("resonances.thetas: at least one angle required".into()));
    }
    for t in &thetas {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(t) {
            return Err(CliError::Validation(format!("resonances.thetas: {t} outside [0, pi/2)")));
        }
    }
    let v = cfg.potential()?;
    let base = cfg.build_problem()?;
    let bx = parse_box("resonances", &task.corners)?;
    let mut runs = find_resonances_multi(&v, &thetas, &bx, &base, &options(cfg)?).map_err(numerical)?;
    let mut distinct = thetas.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let theta_invariant = if distinct.len() >= 2 {
        mark_theta_invariance(&mut runs, cfg.tolerances.tau_theta).map_err(numerical)?;
        Some(theta_invariance_filter(&runs, cfg.tolerances.tau_theta).map_err(numerical)?)
    } else {
        None
    };
    Ok(ResonanceOutput { runs, theta_invariant })
}

pub fn mfunc(cfg: &RunConfig) -> Result<Vec<MfuncRow>, CliError> {
    let task = cfg.mfunc.as_ref().ok_or_else(|| missing("mfunc"))?;
    if task.re_count == 0 || task.im_count == 0 {
        return Err(CliError::Validation("mfunc: re_count and im_count must be positive".into()));
    }
    let problem = cfg.build_problem()?.for_family(parse_family("mfunc.family", &task.family)?);
    let b_n = task.b_n.unwrap_or_else(|| problem.max_bn());
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        }
    };
    let tol = Tolerances::uniform(cfg.tolerances.ode);
    let mut rows = Vec::new();
    for &im in &axis(task.im[0], task.im[1], task.im_count) {
        for &re in &axis(task.re[0], task.re[1], task.re_count) {
            let lambda = Complex64::new(re, im);
            let m = compute_mn(&problem, b_n, lambda, tol).map_err(numerical)?;
            rows.push(MfuncRow {
                lambda,
                m: (m.value.is_finite() && !m.at_pole).then_some(m.value),
                at_pole: m.at_pole,
                b_n,
            });
        }
    }
    Ok(rows)
}

pub fn classify(cfg: &RunConfig) -> Result<ClassifyOutput, CliError> {
    let task = cfg.classify.as_ref().ok_or_else(|| missing("classify"))?;
    let problem = cfg.build_problem()?;
    let lambda = task.lambda.to_complex("classify.lambda")?;
    let [r_lo, r_hi] = task.r_range;
    if !(r_lo > 0.0 && r_hi >= r_lo) || task.r_count == 0 {
        return Err(CliError::Validation("classify.r_range: need 0 < r_min <= r_max and r_count > 0".into()));
    }
    let hull = sample_hull(&problem, task.x_points, &log_grid(r_lo, r_hi, task.r_count))
        .map_err(|e| CliError::Validation(format!("classify: {e}")))?;
    let pair = admissible_pair(&hull, lambda).map_err(|e| CliError::Validation(format!("classify.lambda: {e}")))?;
    let diagnostic = case_diagnostic(&problem, lambda, &pair, Tolerances::uniform(cfg.tolerances.ode)).map_err(|e| match e {
        nssl::sims::SimsError::ScheduleTooShort(_) | nssl::sims::SimsError::OutsideHalfPlane(_) => {
            CliError::Validation(format!("classify: {e}"))
        }
        other => numerical(other),
    })?;
    Ok(ClassifyOutput { hull, pair, diagnostic })
}

fn write_target(path: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (common, thetas, cloud) = match &cli.command {
        Command::Solve(c) | Command::Verify(c) | Command::Mfunc(c) => (c, Vec::new(), None),
        Command::Resonances { common, theta } => (common, theta.clone(), None),
        Command::Classify { common, point_cloud } => (common, Vec::new(), point_cloud.clone()),
    };
    let text = fs::read_to_string(&common.config)
        .map_err(|e| CliError::Validation(format!("{}: {e}", common.config.display())))?;
    let cfg = RunConfig::from_toml(&text)?;
    let format = common.format.unwrap_or(cfg.output.format);
    let path = common.output.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));

    let outcome = match cli.command {
        Command::Solve(_) => Outcome::Solve(solve(&cfg)?),
        Command::Verify(_) => Outcome::Verify(run_verify(&cfg)?),
        Command::Resonances { .. } => Outcome::Resonances(resonances(&cfg, &thetas)?),
        Command::Mfunc(_) => Outcome::Mfunc(mfunc(&cfg)?),
        Command::Classify { .. } => Outcome::Classify(classify(&cfg)?),
    };
    if let Outcome::Classify(out) = &outcome {
        let cloud = cloud.or_else(|| cfg.classify.as_ref().and_then(|c| c.point_cloud.as_ref().map(PathBuf::from)));
        if let Some(cloud) = cloud {
            write_target(Some(&cloud), &output::point_cloud_csv(&out.hull)?, stdout)?;
        }
    }
    let rendered = output::render(&outcome, format)?;
    write_target(path.as_ref(), &rendered, stdout)
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "nssl: {e}");
            e.exit_code()
        }
    }
}
