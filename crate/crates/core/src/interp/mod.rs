//! Interpolants from certificates: generator preparation, the general
//! (cone) and Archimedean (quadratic module) tracks, degree escalation and
//! DNF combination.

use std::fmt;

use log::{info, warn};
use thiserror::Error;

use crate::certgen::{certificate_generation, CertConfig, CertError, Certificate};
use crate::poly::{PolyError, Polynomial};
use crate::sas::{check_archimedean_form, harmonize_variables, DefEquations, Sas, SasError, SharedVars};

/// More generators than this and the subset-product expansion is refused.
pub const MAX_GENERATORS: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpError {
    #[error("{0} cone generators exceed the limit of {MAX_GENERATORS}; prune constraints")]
    TooManyGenerators(usize),
    #[error("monoid factor is the zero polynomial")]
    ZeroMonoidFactor,
    #[error("systems are not in Archimedean form; missing bounds for {}", .0.join(", "))]
    NotArchimedean(Vec<String>),
    #[error("Archimedean mode needs inequality-only systems, found {0} disequations")]
    HasDisequations(usize),
    #[error("interpolant matrix is empty")]
    EmptyMatrix,
    #[error("interpolant matrix row {0} is incomplete")]
    IncompleteMatrix(usize),
    #[error(transparent)]
    Sas(#[from] SasError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    General,
    Archimedean,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::General => "general",
            Mode::Archimedean => "archimedean",
        })
    }
}

/// Mode requested by a caller; `Auto` picks Archimedean when the bound check
/// passes and no disequations are present.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModeChoice {
    #[default]
    Auto,
    General,
    Archimedean,
}

/// A certificate summand that went into `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Half,
    /// `pᵢ·fᵢ` for generator `i` of the certificate.
    Generator(usize),
    /// `qᵢ·hᵢ` for equation `i` of the certificate.
    Equation(usize),
    Monoid,
}

/// `q > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpolant {
    pub q: Polynomial,
    pub mode: Mode,
    pub degree_bound: u32,
    pub parts: Vec<Part>,
    pub certificate: Certificate,
}

impl Interpolant {
    pub fn holds_at(&self, point: &[f64]) -> Result<bool, PolyError> {
        Ok(self.q.eval(point)? > 0.0)
    }

    /// Indices of certificate equations whose multiplier is part of `q`.
    pub fn equations_in_q(&self) -> impl Iterator<Item = usize> + '_ {
        self.parts.iter().filter_map(|p| match p {
            Part::Equation(i) => Some(*i),
            _ => None,
        })
    }
}

impl fmt::Display for Interpolant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} > 0", self.q)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpConfig {
    pub cert: CertConfig,
    /// First degree bound tried by the escalation wrappers.
    pub start_degree: u32,
    pub max_degree: u32,
    pub shared: SharedVars,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            cert: CertConfig::default(),
            start_degree: 2,
            max_degree: 8,
            shared: SharedVars::All,
        }
    }
}

/// Products over every non-empty subset, by ascending bitmask.
pub fn subset_products(fs: &[Polynomial]) -> Vec<Polynomial> {
    assert!(fs.len() < usize::BITS as usize, "too many factors for subset enumeration");
    (1usize..1 << fs.len())
        .map(|mask| {
            let mut it = (0..fs.len()).filter(|i| mask >> i & 1 == 1);
            let first = fs[it.next().expect("non-empty subset")].clone();
            it.fold(first, |acc, i| &acc * &fs[i])
        })
        .collect()
}

/// `(∏ gᵢ²)^⌊b/deg⌋`, or 1 when the list is empty or the exponent is zero.
/// Each `gᵢ` is first scaled to unit max coefficient: `g` enters the
/// identity with coefficient 1, so a factor like `49.61 - x` would otherwise
/// force multipliers of order 10⁷.
pub fn mult_monoid_power(gs: &[Polynomial], b: u32) -> Result<Option<Polynomial>, InterpError> {
    if gs.iter().any(Polynomial::is_zero) {
        return Err(InterpError::ZeroMonoidFactor);
    }
    if gs.is_empty() {
        return Ok(None);
    }
    let unit = |x: &Polynomial| x.scale(1.0 / x.max_abs_coeff());
    let g = gs.iter().map(unit).fold(None, |acc: Option<Polynomial>, x| {
        let sq = &x * &x;
        Some(match acc {
            Some(a) => &a * &sq,
            None => sq,
        })
    });
    let g = g.expect("non-empty");
    let deg = g.degree().unwrap_or(0);
    // constant factors: g is already a square of a nonzero constant
    if deg == 0 {
        return Ok(Some(g));
    }
    let e = b / deg;
    if e == 0 {
        warn!("monoid product has degree {deg} > b = {b}; using g = 1 (try a larger degree bound)");
        return Ok(None);
    }
    Ok(Some(g.pow(e)))
}

fn monoid_or_one(gs: &[Polynomial], b: u32, t: &Sas) -> Result<Polynomial, InterpError> {
    Ok(mult_monoid_power(gs, b)?.unwrap_or_else(|| Polynomial::one(t.env())))
}

/// General-mode interpolant at a single degree bound.
pub fn sn_interpolants(
    t1: &Sas,
    t2: &Sas,
    defs: &DefEquations,
    b: u32,
    cfg: &InterpConfig,
) -> Result<Option<Interpolant>, InterpError> {
    let (t1, t2) = harmonize_variables(t1, t2, defs, &cfg.shared)?;
    sn_harmonized(&t1, &t2, b, cfg)
}

fn sn_harmonized(t1: &Sas, t2: &Sas, b: u32, cfg: &InterpConfig) -> Result<Option<Interpolant>, InterpError> {
    let count = |s: usize| 1usize.checked_shl(s as u32).map_or(usize::MAX, |v| v - 1);
    let total = count(t1.geqs.len()).saturating_add(count(t2.geqs.len()));
    if total > MAX_GENERATORS {
        return Err(InterpError::TooManyGenerators(total));
    }
    let mut fs = subset_products(&t1.geqs);
    let s1 = fs.len();
    fs.extend(subset_products(&t2.geqs));
    let neqs: Vec<Polynomial> = t1.neqs.iter().chain(&t2.neqs).cloned().collect();
    let g = monoid_or_one(&neqs, b, t1)?;
    let hs: Vec<Polynomial> = t1.eqs.iter().chain(&t2.eqs).cloned().collect();
    let u1 = t1.eqs.len();

    let Some(cert) = certificate_generation(&fs, &g, &hs, b, &cfg.cert)? else {
        return Ok(None);
    };
    let env = t1.env();
    let mut q = Polynomial::constant(env, 0.5);
    let mut parts = vec![Part::Half];
    for i in 0..s1 {
        q = &q + &(&cert.p[i].to_polynomial() * &cert.fs[i]);
        parts.push(Part::Generator(i));
    }
    for i in 0..u1 {
        q = &q + &(&cert.q[i] * &cert.hs[i]);
        parts.push(Part::Equation(i));
    }
    q = &q + &cert.g;
    parts.push(Part::Monoid);
    info!("general-mode interpolant at b={b} with {} terms", q.num_terms());
    Ok(Some(Interpolant {
        q,
        mode: Mode::General,
        degree_bound: b,
        parts,
        certificate: cert,
    }))
}

/// [`sn_interpolants`] tried at `start_degree, start_degree + 2, … ≤ max_degree`,
/// stopping at the first success.
pub fn sn_interpolants_escalating(
    t1: &Sas,
    t2: &Sas,
    defs: &DefEquations,
    cfg: &InterpConfig,
) -> Result<Option<Interpolant>, InterpError> {
    let (t1, t2) = harmonize_variables(t1, t2, defs, &cfg.shared)?;
    let mut b = cfg.start_degree;
    while b <= cfg.max_degree {
        if let Some(i) = sn_harmonized(&t1, &t2, b, cfg)? {
            return Ok(Some(i));
        }
        b += 2;
    }
    Ok(None)
}

/// The systems handed to the quadratic-module track: harmonized, with
/// equations split into two inequalities.
pub fn archimedean_systems(
    t1: &Sas,
    t2: &Sas,
    defs: &DefEquations,
    shared: &SharedVars,
) -> Result<(Sas, Sas), InterpError> {
    let (t1, t2) = harmonize_variables(t1, t2, defs, shared)?;
    let (t1, t2) = (t1.eqs_as_geqs(), t2.eqs_as_geqs());
    let neqs = t1.neqs.len() + t2.neqs.len();
    if neqs > 0 {
        return Err(InterpError::HasDisequations(neqs));
    }
    let report = check_archimedean_form(&t1, &t2);
    if !report.ok {
        return Err(InterpError::NotArchimedean(report.missing));
    }
    Ok((t1, t2))
}

/// Archimedean-mode interpolant from quadratic-module certificates at `b = 2, 4, … ≤ b_max`
/// (starting no lower than `cfg.start_degree`).
pub fn rsn_interpolants(
    t1: &Sas,
    t2: &Sas,
    defs: &DefEquations,
    b_max: u32,
    cfg: &InterpConfig,
) -> Result<Option<Interpolant>, InterpError> {
    let (t1, t2) = archimedean_systems(t1, t2, defs, &cfg.shared)?;
    rsn_prepared(&t1, &t2, b_max, cfg)
}

fn rsn_prepared(t1: &Sas, t2: &Sas, b_max: u32, cfg: &InterpConfig) -> Result<Option<Interpolant>, InterpError> {
    let env = t1.env();
    let fs: Vec<Polynomial> = t1.geqs.iter().chain(&t2.geqs).cloned().collect();
    let s1 = t1.geqs.len();
    let zero = Polynomial::zero(env);
    let mut b = cfg.start_degree.max(2);
    b += b % 2;
    while b <= b_max {
        if let Some(cert) = certificate_generation(&fs, &zero, &[], b, &cfg.cert)? {
            let mut q = Polynomial::constant(env, 0.5);
            let mut parts = vec![Part::Half];
            for i in 0..s1 {
                q = &q + &(&cert.p[i].to_polynomial() * &cert.fs[i]);
                parts.push(Part::Generator(i));
            }
            info!("archimedean-mode interpolant at b={b} with {} terms", q.num_terms());
            return Ok(Some(Interpolant {
                q,
                mode: Mode::Archimedean,
                degree_bound: b,
                parts,
                certificate: cert,
            }));
        }
        b += 2;
    }
    Ok(None)
}

/// Resolves `choice` for one disjunct pair.
pub fn select_mode(t1: &Sas, t2: &Sas, defs: &DefEquations, choice: ModeChoice, shared: &SharedVars) -> Result<Mode, InterpError> {
    match choice {
        ModeChoice::General => Ok(Mode::General),
        ModeChoice::Archimedean => Ok(Mode::Archimedean),
        ModeChoice::Auto => Ok(match archimedean_systems(t1, t2, defs, shared) {
            Ok(_) => Mode::Archimedean,
            Err(InterpError::NotArchimedean(_) | InterpError::HasDisequations(_)) => Mode::General,
            Err(e) => return Err(e),
        }),
    }
}

/// One disjunct pair in the given mode, with escalation up to
/// `cfg.max_degree`.
pub fn interpolate_pair(
    t1: &Sas,
    t2: &Sas,
    defs: &DefEquations,
    mode: Mode,
    cfg: &InterpConfig,
) -> Result<Option<Interpolant>, InterpError> {
    match mode {
        Mode::General => sn_interpolants_escalating(t1, t2, defs, cfg),
        Mode::Archimedean => rsn_interpolants(t1, t2, defs, cfg.max_degree, cfg),
    }
}

/// `⋁ₜ ⋀ₗ I_tl`: rows indexed by disjuncts of the first formula.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolantFormula {
    pub matrix: Vec<Vec<Interpolant>>,
}

impl InterpolantFormula {
    pub fn holds_at(&self, point: &[f64]) -> Result<bool, PolyError> {
        for row in &self.matrix {
            let mut all = true;
            for i in row {
                if !i.holds_at(point)? {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn display_with(&self, precision: Option<usize>) -> String {
        let single = self.matrix.len() == 1 && self.matrix[0].len() == 1;
        let row = |r: &Vec<Interpolant>| {
            let conj: Vec<String> = r
                .iter()
                .map(|i| format!("{} > 0", i.q.display_with(precision)))
                .collect();
            if single || r.len() == 1 {
                conj.join("")
            } else {
                format!("({})", conj.join(" and "))
            }
        };
        self.matrix.iter().map(row).collect::<Vec<_>>().join(" or ")
    }
}

impl fmt::Display for InterpolantFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(None))
    }
}

/// Rows are T1 disjuncts; each cell is `None` if that pair has no
/// interpolant yet.
pub fn combine_interpolants(m: Vec<Vec<Option<Interpolant>>>) -> Result<InterpolantFormula, InterpError> {
    if m.is_empty() || m[0].is_empty() {
        return Err(InterpError::EmptyMatrix);
    }
    let width = m[0].len();
    let mut matrix = Vec::with_capacity(m.len());
    for (t, row) in m.into_iter().enumerate() {
        if row.len() != width {
            return Err(InterpError::IncompleteMatrix(t));
        }
        let row: Option<Vec<Interpolant>> = row.into_iter().collect();
        matrix.push(row.ok_or(InterpError::IncompleteMatrix(t))?);
    }
    Ok(InterpolantFormula { matrix })
}
