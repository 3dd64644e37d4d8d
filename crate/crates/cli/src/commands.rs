//! The `interpolate`, `check` and `info` commands. Each returns an
//! [`Outcome`] carrying the exit code and both renderings of the report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use psatz::certgen::{solver_template, CertConfig, CertError};
use psatz::interp::{
    archimedean_systems, combine_interpolants, interpolate_pair, mult_monoid_power, select_mode, subset_products,
    InterpConfig, InterpError, Interpolant, Mode, ModeChoice, MAX_GENERATORS,
};
use psatz::poly::{binomial, ParseErrorKind, PolyError, Polynomial};
use psatz::sas::{harmonize_variables, parse_atom, Relation, Sas, SasError};
use psatz::validate::{check_polynomial_split, check_separation_split, resolve_side_boxes, ValidateError, ValidationConfig, ValidationReport, Verdict};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::problem::{Problem, ProblemError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARNING: i32 = 1;
pub const EXIT_NULL: i32 = 2;
pub const EXIT_FAIL: i32 = 3;
pub const EXIT_PARSE: i32 = 64;
pub const EXIT_PRECONDITION: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_NO_INPUT,
            CliError::Problem(_) | CliError::Usage(_) => EXIT_PARSE,
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<InterpError> for CliError {
    fn from(e: InterpError) -> Self {
        match e {
            InterpError::Cert(CertError::Sdp(_)) | InterpError::Poly(_) | InterpError::Cert(CertError::Poly(_)) => {
                CliError::Internal(e.to_string())
            }
            InterpError::Sas(s) => s.into(),
            e => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<SasError> for CliError {
    fn from(e: SasError) -> Self {
        match e {
            SasError::Poly(_) => CliError::Internal(e.to_string()),
            e => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<ValidateError> for CliError {
    fn from(e: ValidateError) -> Self {
        match e {
            ValidateError::Poly(_) => CliError::Internal(e.to_string()),
            e => CliError::Precondition(e.to_string()),
        }
    }
}

/// Command-line overrides; unset fields fall back to the problem file's
/// `[options]` and then to the defaults.
#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub mode: Option<String>,
    pub degree: Option<u32>,
    pub max_degree: Option<u32>,
    pub gap_tol: Option<f64>,
    pub feas_tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub margin: Option<f64>,
    pub precision: Option<usize>,
    pub json: bool,
    pub parallel: Option<usize>,
    pub dump_sdp: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub mode: ModeChoice,
    pub interp: InterpConfig,
    pub validation: ValidationConfig,
    pub precision: usize,
    pub parallel: usize,
    pub dump_sdp: Option<PathBuf>,
}

pub fn parse_mode(s: &str) -> Result<ModeChoice, CliError> {
    match s {
        "auto" => Ok(ModeChoice::Auto),
        "general" => Ok(ModeChoice::General),
        "archimedean" => Ok(ModeChoice::Archimedean),
        other => Err(CliError::Usage(format!("unknown mode `{other}` (auto, general, archimedean)"))),
    }
}

impl Settings {
    pub fn resolve(problem: &Problem, flags: &Flags) -> Result<Self, CliError> {
        let o = &problem.options;
        let mode = match flags.mode.as_deref().or(o.mode.as_deref()) {
            Some(m) => parse_mode(m)?,
            None => ModeChoice::Auto,
        };
        let mut interp = InterpConfig {
            shared: problem.shared.clone(),
            ..InterpConfig::default()
        };
        interp.start_degree = flags.degree.or(o.degree).unwrap_or(2);
        interp.max_degree = flags.max_degree.or(o.max_degree).unwrap_or(8);
        if interp.start_degree % 2 != 0 || interp.max_degree % 2 != 0 {
            return Err(CliError::Usage("degree bounds must be even".into()));
        }
        if let Some(v) = flags.gap_tol.or(o.gap_tol) {
            interp.cert.solver.gap_tol = v;
        }
        if let Some(v) = flags.feas_tol.or(o.feas_tol) {
            interp.cert.solver.feas_tol = v;
        }
        let d = ValidationConfig::default();
        let validation = ValidationConfig {
            samples: flags.samples.or(o.samples).unwrap_or(d.samples),
            seed: flags.seed.or(o.seed).unwrap_or(d.seed),
            margin: flags.margin.or(o.margin).unwrap_or(d.margin),
            eq_band: o.eq_band.unwrap_or(d.eq_band),
            ..d
        };
        Ok(Self {
            mode,
            interp,
            validation,
            precision: flags.precision.or(o.precision).unwrap_or(2),
            parallel: flags.parallel.unwrap_or(1).max(1),
            dump_sdp: flags.dump_sdp.clone(),
        })
    }
}

/// Exit code plus the text and JSON renderings of one command run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit: i32,
    pub text: String,
    pub json: Value,
}

impl Outcome {
    pub fn error(e: &CliError) -> Self {
        let exit = e.exit_code();
        Self {
            exit,
            text: format!("error: {e}\n"),
            json: json!({ "error": e.to_string(), "exit": exit }),
        }
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("json");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

pub fn load_problem(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(Problem::parse(&text)?)
}

/// Result of one `(t, l)` disjunct pair.
#[derive(Clone, Debug)]
pub struct PairResult {
    pub t: usize,
    pub l: usize,
    pub mode: Mode,
    pub interpolant: Option<Interpolant>,
    pub report: Option<ValidationReport>,
    pub seconds: f64,
}

fn harmonized(problem: &Problem, t: usize, l: usize) -> Result<(Sas, Sas), CliError> {
    let (a, b) = (&problem.phi.disjuncts()[t], &problem.psi.disjuncts()[l]);
    Ok(harmonize_variables(a, b, &problem.defs, &problem.shared)?)
}

fn solve_pair(problem: &Problem, t: usize, l: usize, s: &Settings) -> Result<PairResult, CliError> {
    let (a, b) = (&problem.phi.disjuncts()[t], &problem.psi.disjuncts()[l]);
    let mode = select_mode(a, b, &problem.defs, s.mode, &problem.shared)?;
    let start = Instant::now();
    let interpolant = interpolate_pair(a, b, &problem.defs, mode, &s.interp)?;
    let seconds = start.elapsed().as_secs_f64();
    let report = match &interpolant {
        Some(i) => {
            let (h1, h2) = harmonized(problem, t, l)?;
            let (b1, b2) = resolve_side_boxes(h1.env(), &problem.sample_box, &h1, &h2)?;
            Some(check_separation_split(i, &h1, &h2, (&b1, &b2), &s.validation)?)
        }
        None => None,
    };
    Ok(PairResult {
        t,
        l,
        mode,
        interpolant,
        report,
        seconds,
    })
}

/// All pairs, on up to `s.parallel` workers, in `(t, l)` order.
pub fn solve_all(problem: &Problem, s: &Settings) -> Result<Vec<PairResult>, CliError> {
    let pairs: Vec<(usize, usize)> = (0..problem.phi.disjuncts().len())
        .flat_map(|t| (0..problem.psi.disjuncts().len()).map(move |l| (t, l)))
        .collect();
    let run = || pairs.par_iter().map(|&(t, l)| solve_pair(problem, t, l, s)).collect::<Vec<_>>();
    let results = if s.parallel > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(s.parallel)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(run)
    } else {
        pairs.iter().map(|&(t, l)| solve_pair(problem, t, l, s)).collect()
    };
    results.into_iter().collect()
}

fn exit_for(results: &[PairResult]) -> i32 {
    let verdicts = || results.iter().filter_map(|r| r.report.as_ref().map(|v| v.verdict));
    if verdicts().any(|v| v == Verdict::Fail) {
        EXIT_FAIL
    } else if results.iter().any(|r| r.interpolant.is_none()) {
        EXIT_NULL
    } else if verdicts().any(|v| v == Verdict::MarginWarning) {
        EXIT_WARNING
    } else {
        EXIT_OK
    }
}

fn indent(s: &str, by: &str) -> String {
    s.lines().map(|l| format!("{by}{l}\n")).collect()
}

fn certificate_json(i: &Interpolant, precision: usize) -> Value {
    let c = &i.certificate;
    let min_eig = c.grams().map(|g| g.min_eigenvalue()).fold(f64::INFINITY, f64::min);
    json!({
        "degree": c.degree,
        "generators": c.fs.len(),
        "equations": c.hs.len(),
        "residual_max_coeff": c.residual.max_abs_coeff(),
        "min_gram_eigenvalue": min_eig,
        "report": c.report(precision),
    })
}

pub fn cmd_interpolate(problem: &Problem, s: &Settings) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let results = solve_all(problem, s)?;
    let total = start.elapsed().as_secs_f64();
    let exit = exit_for(&results);
    let prec = Some(s.precision);

    if let Some(path) = &s.dump_sdp {
        dump_templates(path, &results, &s.interp.cert)?;
    }

    let mut text = String::new();
    let mut pairs = Vec::new();
    for r in &results {
        let head = format!("pair ({}, {}): {} mode", r.t + 1, r.l + 1, r.mode);
        let mut pj = json!({ "t": r.t + 1, "l": r.l + 1, "mode": r.mode.to_string(), "seconds": r.seconds });
        match (&r.interpolant, &r.report) {
            (Some(i), Some(rep)) => {
                text += &format!("{head}, b = {}, {:.3} s\n", i.degree_bound, r.seconds);
                text += &format!("  interpolant: {} > 0\n", i.q.display_with(prec));
                text += &format!("  q: {}\n", i.q);
                text += &indent(&i.certificate.report(s.precision), "  ");
                text += &indent(&rep.to_string(), "  ");
                pj["status"] = json!("found");
                pj["degree_bound"] = json!(i.degree_bound);
                pj["interpolant"] = json!(format!("{} > 0", i.q.display_with(prec)));
                pj["q"] = json!(i.q.to_string());
                pj["certificate"] = certificate_json(i, s.precision);
                pj["validation"] = serde_json::to_value(rep).expect("report");
            }
            _ => {
                text += &format!(
                    "{head}, NULL: no certificate up to b = {}, {:.3} s\n",
                    s.interp.max_degree, r.seconds
                );
                pj["status"] = json!("null");
                pj["max_degree"] = json!(s.interp.max_degree);
            }
        }
        pairs.push(pj);
    }

    let formula = if results.iter().all(|r| r.interpolant.is_some()) {
        let rows = problem.phi.disjuncts().len();
        let cols = problem.psi.disjuncts().len();
        let mut m = vec![Vec::with_capacity(cols); rows];
        for r in &results {
            m[r.t].push(r.interpolant.clone());
        }
        Some(combine_interpolants(m)?.display_with(prec))
    } else {
        None
    };
    match &formula {
        Some(f) => text += &format!("interpolant formula: {f}\n"),
        None => text += "interpolant formula: NULL\n",
    }
    text += &format!("total {total:.3} s, exit {exit}\n");
    let json = json!({
        "command": "interpolate",
        "pairs": pairs,
        "formula": formula,
        "seconds": total,
        "exit": exit,
    });
    Ok(Outcome { exit, text, json })
}

fn dump_path(base: &Path, r: &PairResult, many: bool) -> PathBuf {
    if !many {
        return base.to_path_buf();
    }
    let mut name = base.as_os_str().to_owned();
    name.push(format!(".{}-{}", r.t + 1, r.l + 1));
    PathBuf::from(name)
}

/// Writes the SDP solved at each successful pair's final degree bound.
fn dump_templates(base: &Path, results: &[PairResult], cert_cfg: &CertConfig) -> Result<(), CliError> {
    let many = results.len() > 1;
    for r in results {
        let Some(i) = &r.interpolant else { continue };
        let c = &i.certificate;
        let (tpl, _) =
            solver_template(&c.fs, &c.g, &c.hs, c.degree, cert_cfg).map_err(|e| CliError::Internal(e.to_string()))?;
        let path = dump_path(base, r, many);
        std::fs::write(&path, tpl.problem.dump()).map_err(|e| CliError::Io {
            path,
            message: e.to_string(),
        })?;
    }
    Ok(())
}

/// Parses `q > 0` (or `q < 0`, read as `-q > 0`) over `problem`'s variables
/// after definitions are eliminated.
pub fn parse_interpolant(text: &str, problem: &Problem) -> Result<Polynomial, CliError> {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| CliError::Usage("interpolant file is empty".into()))?;
    let (h1, _) = harmonized(problem, 0, 0)?;
    let atom = parse_atom(line, h1.env()).map_err(|e| match e {
        SasError::Poly(PolyError::UnknownVariable(v))
        | SasError::Poly(PolyError::Parse(psatz::poly::ParseError {
            kind: ParseErrorKind::UnknownVariable(v),
            ..
        })) => CliError::Precondition(format!("interpolant mentions `{v}`, which is not a variable of the problem")),
        e => CliError::Usage(format!("interpolant: {e}")),
    })?;
    match atom.rel {
        Relation::Gt | Relation::Ge => Ok(atom.poly),
        Relation::Lt | Relation::Le => Ok(-&atom.poly),
        r => Err(CliError::Usage(format!("interpolant relation `{}` is not an inequality", r.symbol()))),
    }
}

pub fn cmd_check(problem: &Problem, interpolant: &str, s: &Settings) -> Result<Outcome, CliError> {
    let q = parse_interpolant(interpolant, problem)?;
    let mut worst = Verdict::Pass;
    let mut text = format!("checking {} > 0\n", q.display_with(Some(s.precision)));
    let mut pairs = Vec::new();
    for t in 0..problem.phi.disjuncts().len() {
        for l in 0..problem.psi.disjuncts().len() {
            let (h1, h2) = harmonized(problem, t, l)?;
            let (b1, b2) = resolve_side_boxes(h1.env(), &problem.sample_box, &h1, &h2)?;
            let rep = check_polynomial_split(&q, None, &h1, &h2, (&b1, &b2), &s.validation)?;
            worst = worst.max_by_severity(rep.verdict);
            text += &format!("pair ({}, {}):\n", t + 1, l + 1);
            text += &indent(&rep.to_string(), "  ");
            pairs.push(json!({ "t": t + 1, "l": l + 1, "validation": rep }));
        }
    }
    let exit = match worst {
        Verdict::Pass => EXIT_OK,
        Verdict::MarginWarning => EXIT_WARNING,
        Verdict::Fail => EXIT_FAIL,
    };
    text += &format!("verdict {worst}, exit {exit}\n");
    let json = json!({
        "command": "check",
        "q": q.to_string(),
        "pairs": pairs,
        "verdict": worst,
        "exit": exit,
    });
    Ok(Outcome { exit, text, json })
}

trait Severity {
    fn max_by_severity(self, other: Self) -> Self;
}

impl Severity for Verdict {
    fn max_by_severity(self, other: Self) -> Self {
        let rank = |v: Verdict| match v {
            Verdict::Pass => 0,
            Verdict::MarginWarning => 1,
            Verdict::Fail => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

/// Predicted SDP size at one degree bound.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeRow {
    pub b: u32,
    pub blocks: usize,
    pub block_size: u64,
    pub template_degree: u32,
    pub constraint_bound: u64,
}

/// Size predictions for both modes of one pair. `n` counts variables after
/// definitions are eliminated.
pub fn predict_sizes(
    n: usize,
    generators: &[Polynomial],
    monoid: &[Polynomial],
    equations: &[Polynomial],
    b_range: impl Iterator<Item = u32>,
) -> Result<Vec<SizeRow>, CliError> {
    let deg = |p: &Polynomial| p.degree().unwrap_or(0);
    let top = generators.iter().chain(equations).map(deg).max().unwrap_or(0);
    b_range
        .map(|b| {
            let g = mult_monoid_power(monoid, b)?;
            let template_degree = (b + top).max(g.as_ref().map_or(0, deg));
            let n = n as u64;
            Ok(SizeRow {
                b,
                blocks: 1 + generators.len() + 2 * equations.len(),
                block_size: binomial(n + u64::from(b / 2), n),
                template_degree,
                constraint_bound: binomial(n + u64::from(template_degree), n),
            })
        })
        .collect::<Result<_, InterpError>>()
        .map_err(CliError::from)
}

pub fn cmd_info(problem: &Problem, s: &Settings) -> Result<Outcome, CliError> {
    let mut text = String::new();
    let mut pairs = Vec::new();
    for t in 0..problem.phi.disjuncts().len() {
        for l in 0..problem.psi.disjuncts().len() {
            let (a, b) = (&problem.phi.disjuncts()[t], &problem.psi.disjuncts()[l]);
            let mode = select_mode(a, b, &problem.defs, s.mode, &problem.shared)?;
            let (h1, h2) = harmonized(problem, t, l)?;
            let n = h1.env().len();
            let lo = s.interp.start_degree;
            let hi = s.interp.max_degree;
            let rows = match mode {
                Mode::General => {
                    let count = |k: usize| 1usize.checked_shl(k as u32).map_or(usize::MAX, |v| v - 1);
                    let total = count(h1.geqs.len()).saturating_add(count(h2.geqs.len()));
                    if total > MAX_GENERATORS {
                        return Err(InterpError::TooManyGenerators(total).into());
                    }
                    let mut fs = subset_products(&h1.geqs);
                    fs.extend(subset_products(&h2.geqs));
                    let neqs: Vec<Polynomial> = h1.neqs.iter().chain(&h2.neqs).cloned().collect();
                    let hs: Vec<Polynomial> = h1.eqs.iter().chain(&h2.eqs).cloned().collect();
                    predict_sizes(n, &fs, &neqs, &hs, (lo..=hi).step_by(2))?
                }
                Mode::Archimedean => {
                    let (r1, r2) = archimedean_systems(a, b, &problem.defs, &problem.shared)?;
                    let fs: Vec<Polynomial> = r1.geqs.iter().chain(&r2.geqs).cloned().collect();
                    let start = lo.max(2) + lo % 2;
                    predict_sizes(n, &fs, &[], &[], (start..=hi).step_by(2))?
                }
            };
            text += &format!("pair ({}, {}): {mode} mode, n = {n}\n", t + 1, l + 1);
            text += "     b  blocks  block size  template degree  constraint bound\n";
            let mut rj = Vec::new();
            for r in &rows {
                text += &format!(
                    "  {:>4}  {:>6}  {:>10}  {:>15}  {:>16}\n",
                    r.b, r.blocks, r.block_size, r.template_degree, r.constraint_bound
                );
                rj.push(json!({
                    "b": r.b,
                    "blocks": r.blocks,
                    "block_size": r.block_size,
                    "template_degree": r.template_degree,
                    "constraint_bound": r.constraint_bound,
                }));
            }
            pairs.push(json!({ "t": t + 1, "l": l + 1, "mode": mode.to_string(), "n": n, "sizes": rj }));
        }
    }
    Ok(Outcome {
        exit: EXIT_OK,
        text,
        json: json!({ "command": "info", "pairs": pairs, "exit": EXIT_OK }),
    })
}

/// Loads `path`, resolves settings and runs `f`, folding errors into the
/// outcome.
pub fn run_with<F>(path: &Path, flags: &Flags, f: F) -> Outcome
where
    F: FnOnce(&Problem, &Settings) -> Result<Outcome, CliError>,
{
    let go = || -> Result<Outcome, CliError> {
        let problem = load_problem(path)?;
        let settings = Settings::resolve(&problem, flags)?;
        f(&problem, &settings)
    };
    go().unwrap_or_else(|e| Outcome::error(&e))
}

pub fn run_interpolate(path: &Path, flags: &Flags) -> Outcome {
    run_with(path, flags, cmd_interpolate)
}

pub fn run_check(path: &Path, interpolant: &Path, flags: &Flags) -> Outcome {
    let text = match std::fs::read_to_string(interpolant) {
        Ok(t) => t,
        Err(e) => {
            return Outcome::error(&CliError::Io {
                path: interpolant.to_path_buf(),
                message: e.to_string(),
            })
        }
    };
    run_with(path, flags, |p, s| cmd_check(p, &text, s))
}

pub fn run_info(path: &Path, flags: &Flags) -> Outcome {
    run_with(path, flags, cmd_info)
}
