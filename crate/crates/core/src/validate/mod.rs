//! Independent checks of certificates and interpolants: identity residual and
//! Gram eigenvalues, and sampled sign conditions on both systems.
//!
//! A `Pass` is evidence from finitely many samples, not a proof. A `Fail`
//! carries the offending point.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certgen::{residual, Certificate};
use crate::interp::{Interpolant, Part};
use crate::poly::{PolyError, Polynomial, VarEnv};
use crate::sas::{variable_bounds, Sas};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidateError {
    #[error("no sampling interval for variable `{0}` and none derivable from bounds")]
    MissingBox(String),
    #[error("sampling box has {got} intervals for {want} variables")]
    BoxShape { got: usize, want: usize },
    #[error("interval for `{0}` is empty or not finite")]
    BadInterval(String),
    #[error("interpolant and systems live in different variable environments")]
    EnvMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    /// Max coefficient magnitude of the recomputed identity.
    pub residual_norm: f64,
    pub worst_gram_eig: f64,
    pub pass: bool,
}

/// Recomputes the identity from its summands and checks every Gram block.
pub fn check_certificate(c: &Certificate, tol: f64) -> CertificateCheck {
    let scale = c.scale();
    let residual_norm = residual(c).max_abs_coeff();
    let worst_gram_eig = c.grams().map(|s| s.min_eigenvalue()).fold(f64::INFINITY, f64::min);
    let pass = residual_norm <= tol * scale && worst_gram_eig >= -tol * scale;
    CertificateCheck {
        residual_norm,
        worst_gram_eig,
        pass,
    }
}

/// Per-variable sampling intervals, in environment order.
pub type SampleBox = Vec<(f64, f64)>;

/// Builds a box for `env`: explicit intervals first, then bounds implied by
/// the systems' inequalities, intersected with explicit ones when both exist.
/// Variables mentioned by neither fall back to the explicit list only.
pub fn resolve_box(
    env: &VarEnv,
    explicit: &BTreeMap<String, (f64, f64)>,
    systems: &[&Sas],
) -> Result<SampleBox, ValidateError> {
    let derived = variable_bounds(systems);
    (0..env.len())
        .map(|i| {
            let name = env.name(i);
            let iv = match (explicit.get(name), derived.get(&i)) {
                (Some(&(a, b)), Some(&(c, d))) => (a.max(c), b.min(d)),
                (Some(&iv), None) | (None, Some(&iv)) => iv,
                (None, None) => return Err(ValidateError::MissingBox(name.to_string())),
            };
            if !(iv.0.is_finite() && iv.1.is_finite() && iv.0 <= iv.1) {
                return Err(ValidateError::BadInterval(name.to_string()));
            }
            Ok(iv)
        })
        .collect()
}

/// One box per side: each variable takes the explicit interval intersected
/// with the bounds of that side's own inequalities, and falls back to the
/// other side's bounds only when neither of those exists. Separated systems
/// such as `x ≥ 2` against `0 ≤ x ≤ 1` would get an empty box if both
/// sides' bounds were intersected.
pub fn resolve_side_boxes(
    env: &VarEnv,
    explicit: &BTreeMap<String, (f64, f64)>,
    t1: &Sas,
    t2: &Sas,
) -> Result<(SampleBox, SampleBox), ValidateError> {
    let (d1, d2) = (variable_bounds(&[t1]), variable_bounds(&[t2]));
    let side = |own: &BTreeMap<usize, (f64, f64)>, other: &BTreeMap<usize, (f64, f64)>| {
        (0..env.len())
            .map(|i| {
                let name = env.name(i);
                let iv = match (explicit.get(name), own.get(&i), other.get(&i)) {
                    (Some(&(a, b)), Some(&(c, d)), _) => (a.max(c), b.min(d)),
                    (Some(&iv), None, _) | (None, Some(&iv), _) | (None, None, Some(&iv)) => iv,
                    (None, None, None) => return Err(ValidateError::MissingBox(name.to_string())),
                };
                if !(iv.0.is_finite() && iv.1.is_finite() && iv.0 <= iv.1) {
                    return Err(ValidateError::BadInterval(name.to_string()));
                }
                Ok(iv)
            })
            .collect::<Result<SampleBox, _>>()
    };
    Ok((side(&d1, &d2)?, side(&d2, &d1)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub attempts: usize,
}

impl SampleSet {
    pub fn acceptance_ratio(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.points.len() as f64 / self.attempts as f64
        }
    }
}

pub const DEFAULT_NEQ_BAND: f64 = 1e-9;

/// Uniform draws from `bx` kept when every constraint of `t` holds, with
/// equations relaxed to `|h| ≤ eq_band`. When `t` has equations each draw is
/// first pulled towards the variety by Gauss-Newton steps.
pub fn sample_sas(t: &Sas, n: usize, seed: u64, bx: &SampleBox, eq_band: f64) -> Result<SampleSet, ValidateError> {
    sample_stream(t, n, seed, 0, bx, eq_band, DEFAULT_NEQ_BAND)
}

fn sample_stream(
    t: &Sas,
    n: usize,
    seed: u64,
    stream: u64,
    bx: &SampleBox,
    eq_band: f64,
    neq_band: f64,
) -> Result<SampleSet, ValidateError> {
    let dim = t.env().len();
    if bx.len() != dim {
        return Err(ValidateError::BoxShape { got: bx.len(), want: dim });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let projector = (!t.eqs.is_empty()).then(|| Projector::new(&t.eqs));
    let mut points = Vec::new();
    for _ in 0..n {
        let mut a: Vec<f64> = bx
            .iter()
            .map(|&(lo, hi)| if lo < hi { rng.random_range(lo..=hi) } else { lo })
            .collect();
        if let Some(p) = &projector {
            p.project(&mut a, eq_band)?;
        }
        if accepts(t, &a, bx, eq_band, neq_band)? {
            points.push(a);
        }
    }
    Ok(SampleSet { points, attempts: n })
}

fn accepts(t: &Sas, a: &[f64], bx: &SampleBox, eq_band: f64, neq_band: f64) -> Result<bool, PolyError> {
    if a.iter().zip(bx).any(|(v, &(lo, hi))| !(lo..=hi).contains(v)) {
        return Ok(false);
    }
    for f in &t.geqs {
        if f.eval(a)? < 0.0 {
            return Ok(false);
        }
    }
    for g in &t.neqs {
        if g.eval(a)?.abs() < neq_band {
            return Ok(false);
        }
    }
    for h in &t.eqs {
        if h.eval(a)?.abs() > eq_band {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Projector {
    eqs: Vec<Polynomial>,
    jac: Vec<Vec<Polynomial>>,
}

impl Projector {
    fn new(eqs: &[Polynomial]) -> Self {
        let n = eqs[0].env().len();
        let jac = eqs.iter().map(|h| (0..n).map(|j| h.derivative(j)).collect()).collect();
        Self { eqs: eqs.to_vec(), jac }
    }

    // Minimum-norm Gauss-Newton: a ← a − Jᵀ (J Jᵀ)⁻¹ h(a).
    fn project(&self, a: &mut [f64], band: f64) -> Result<(), PolyError> {
        let k = self.eqs.len();
        for _ in 0..50 {
            let h: Vec<f64> = self.eqs.iter().map(|p| p.eval(a)).collect::<Result<_, _>>()?;
            if h.iter().all(|v| v.abs() <= 0.1 * band) || h.iter().any(|v| !v.is_finite()) {
                return Ok(());
            }
            let j: Vec<Vec<f64>> = self
                .jac
                .iter()
                .map(|row| row.iter().map(|d| d.eval(a)).collect::<Result<_, _>>())
                .collect::<Result<_, _>>()?;
            let mut m = vec![vec![0.0; k]; k];
            for r in 0..k {
                for c in 0..k {
                    m[r][c] = j[r].iter().zip(&j[c]).map(|(x, y)| x * y).sum();
                }
            }
            let trace: f64 = (0..k).map(|r| m[r][r]).sum();
            if trace == 0.0 {
                return Ok(());
            }
            for (r, row) in m.iter_mut().enumerate() {
                row[r] += 1e-12 * trace;
            }
            let Some(w) = solve_dense(m, h) else {
                return Ok(());
            };
            for (i, v) in a.iter_mut().enumerate() {
                *v -= (0..k).map(|r| j[r][i] * w[r]).sum::<f64>();
            }
        }
        Ok(())
    }
}

// Gaussian elimination with partial pivoting on a small system.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let k = rhs.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            for c in col..k {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Sample attempts per side.
    pub samples: usize,
    pub seed: u64,
    pub margin: f64,
    pub eq_band: f64,
    pub neq_band: f64,
    /// Relative tolerance of the certificate check.
    pub cert_tol: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 42,
            margin: 0.1,
            eq_band: 1e-6,
            neq_band: DEFAULT_NEQ_BAND,
            cert_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    MarginWarning,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::MarginWarning => "MARGIN-WARNING",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    T1,
    T2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub side: Side,
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Absent when the interpolant came without a certificate.
    pub residual_norm: Option<f64>,
    pub worst_gram_eig: Option<f64>,
    pub certificate_pass: Option<bool>,
    pub t1_samples: usize,
    pub t1_attempts: usize,
    pub t1_min: Option<f64>,
    pub t2_samples: usize,
    pub t2_attempts: usize,
    pub t2_max: Option<f64>,
    /// Sampled points where `q` breaks the bound implied by the certificate.
    pub bound_violations: usize,
    pub verdict: Verdict,
    pub seed: u64,
    pub counterexample: Option<Counterexample>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn t1_acceptance(&self) -> f64 {
        ratio(self.t1_samples, self.t1_attempts)
    }

    pub fn t2_acceptance(&self) -> f64 {
        ratio(self.t2_samples, self.t2_attempts)
    }

    /// Smaller of the two sampled margins.
    pub fn margin(&self) -> Option<f64> {
        Some(self.t1_min?.min(-self.t2_max?))
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6e}"));
        writeln!(f, "verdict: {} (seed {})", self.verdict, self.seed)?;
        writeln!(
            f,
            "  certificate: residual {}, worst Gram eigenvalue {}",
            opt(self.residual_norm),
            opt(self.worst_gram_eig)
        )?;
        writeln!(
            f,
            "  T1: {} of {} samples ({:.2}%), min q = {}",
            self.t1_samples,
            self.t1_attempts,
            100.0 * self.t1_acceptance(),
            opt(self.t1_min)
        )?;
        writeln!(
            f,
            "  T2: {} of {} samples ({:.2}%), max q = {}",
            self.t2_samples,
            self.t2_attempts,
            100.0 * self.t2_acceptance(),
            opt(self.t2_max)
        )?;
        if self.bound_violations > 0 {
            writeln!(f, "  certificate bound violated at {} samples", self.bound_violations)?;
        }
        if let Some(c) = &self.counterexample {
            writeln!(f, "  counterexample on {:?}: q{:?} = {:.6e}", c.side, c.point, c.value)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        write!(f, "  (sampling gives evidence, not a proof)")
    }
}

/// Sign check of a synthesized interpolant, including its certificate.
pub fn check_separation(
    i: &Interpolant,
    t1: &Sas,
    t2: &Sas,
    bx: &SampleBox,
    cfg: &ValidationConfig,
) -> Result<ValidationReport, ValidateError> {
    check_polynomial(&i.q, Some(i), t1, t2, bx, cfg)
}

/// [`check_separation`] with a separate sampling box per side.
pub fn check_separation_split(
    i: &Interpolant,
    t1: &Sas,
    t2: &Sas,
    boxes: (&SampleBox, &SampleBox),
    cfg: &ValidationConfig,
) -> Result<ValidationReport, ValidateError> {
    check_polynomial_split(&i.q, Some(i), t1, t2, boxes, cfg)
}

/// Sign check of `q > 0` against both systems; `origin` adds the
/// certificate checks when `q` was synthesized here.
pub fn check_polynomial(
    q: &Polynomial,
    origin: Option<&Interpolant>,
    t1: &Sas,
    t2: &Sas,
    bx: &SampleBox,
    cfg: &ValidationConfig,
) -> Result<ValidationReport, ValidateError> {
    check_polynomial_split(q, origin, t1, t2, (bx, bx), cfg)
}

/// [`check_polynomial`] with a separate sampling box per side.
pub fn check_polynomial_split(
    q: &Polynomial,
    origin: Option<&Interpolant>,
    t1: &Sas,
    t2: &Sas,
    (bx1, bx2): (&SampleBox, &SampleBox),
    cfg: &ValidationConfig,
) -> Result<ValidationReport, ValidateError> {
    if q.env() != t1.env() || t1.env() != t2.env() {
        return Err(ValidateError::EnvMismatch);
    }
    let s1 = sample_stream(t1, cfg.samples, cfg.seed, 0, bx1, cfg.eq_band, cfg.neq_band)?;
    let s2 = sample_stream(t2, cfg.samples, cfg.seed, 1, bx2, cfg.eq_band, cfg.neq_band)?;

    let cert = origin.map(|i| check_certificate(&i.certificate, cfg.cert_tol));
    let bound = origin.map(|i| CertBound::new(i));
    let mut counterexample = None;
    let mut violations = 0usize;
    let mut t1_min: Option<f64> = None;
    for a in &s1.points {
        let v = q.eval(a)?;
        t1_min = Some(t1_min.map_or(v, |m| m.min(v)));
        if v <= 0.0 && counterexample.is_none() {
            counterexample = Some(Counterexample { side: Side::T1, point: a.clone(), value: v });
        }
        if let Some(b) = &bound {
            violations += usize::from(!b.t1_ok(v, a, cfg.eq_band)?);
        }
    }
    let mut t2_max: Option<f64> = None;
    for a in &s2.points {
        let v = q.eval(a)?;
        t2_max = Some(t2_max.map_or(v, |m| m.max(v)));
        if v >= 0.0 && counterexample.is_none() {
            counterexample = Some(Counterexample { side: Side::T2, point: a.clone(), value: v });
        }
        if let Some(b) = &bound {
            violations += usize::from(!b.t2_ok(v, a, cfg.eq_band)?);
        }
    }

    let mut notes = Vec::new();
    for (name, s) in [("T1", &s1), ("T2", &s2)] {
        if s.points.is_empty() {
            notes.push(format!(
                "no {name} samples accepted out of {} attempts; enlarge the box or the sample count",
                s.attempts
            ));
        }
    }
    let margin_ok = matches!((t1_min, t2_max), (Some(lo), Some(hi)) if lo >= cfg.margin && hi <= -cfg.margin);
    let certificate_pass = cert.map(|c| c.pass);
    let verdict = if counterexample.is_some() {
        Verdict::Fail
    } else if margin_ok && certificate_pass != Some(false) && violations == 0 {
        Verdict::Pass
    } else {
        if !margin_ok && notes.is_empty() {
            notes.push(format!("sampled margin below {}", cfg.margin));
        }
        if certificate_pass == Some(false) {
            notes.push("certificate outside residual/eigenvalue tolerance".into());
        }
        Verdict::MarginWarning
    };
    Ok(ValidationReport {
        residual_norm: cert.map(|c| c.residual_norm),
        worst_gram_eig: cert.map(|c| c.worst_gram_eig),
        certificate_pass,
        t1_samples: s1.points.len(),
        t1_attempts: s1.attempts,
        t1_min,
        t2_samples: s2.points.len(),
        t2_attempts: s2.attempts,
        t2_max,
        bound_violations: violations,
        verdict,
        seed: cfg.seed,
        counterexample,
        notes,
    })
}

// The lower bound on T1 samples and the upper bound on T2 samples that the
// certificate identity implies, given how far each point is from satisfying
// the generators and equations exactly.
struct CertBound {
    residual: Polynomial,
    /// (multiplier·generator, generator, in q)
    gens: Vec<(Polynomial, Polynomial, bool)>,
    /// (multiplier, in q)
    eqs: Vec<(Polynomial, bool)>,
    scale: f64,
}

impl CertBound {
    fn new(i: &Interpolant) -> Self {
        let c = &i.certificate;
        let in_q_gen = |k| i.parts.contains(&Part::Generator(k));
        let in_q_eq = |k| i.parts.contains(&Part::Equation(k));
        let gens = c
            .p
            .iter()
            .zip(&c.fs)
            .enumerate()
            .map(|(k, (p, f))| (p.to_polynomial(), f.clone(), in_q_gen(k)))
            .collect();
        let eqs = c.q.iter().enumerate().map(|(k, q)| (q.clone(), in_q_eq(k))).collect();
        Self {
            residual: c.residual.clone(),
            gens,
            eqs,
            scale: c.scale(),
        }
    }

    // Slack from generators that are slightly negative at `a` and equations
    // that are only satisfied up to the band.
    fn slack(&self, a: &[f64], band: f64, in_q: bool) -> Result<f64, PolyError> {
        let mut s = self.residual.eval(a)?.abs() + 1e-9 * self.scale;
        for (p, f, used) in &self.gens {
            if *used == in_q {
                s += p.eval(a)?.abs() * (-f.eval(a)?).max(0.0);
            }
        }
        for (q, used) in &self.eqs {
            if *used == in_q {
                s += q.eval(a)?.abs() * band;
            }
        }
        Ok(s)
    }

    fn t1_ok(&self, v: f64, a: &[f64], band: f64) -> Result<bool, PolyError> {
        // q = 1/2 + Σ (T1 parts) + g with r entering on the other side
        Ok(v >= 0.5 - self.slack(a, band, true)?)
    }

    fn t2_ok(&self, v: f64, a: &[f64], band: f64) -> Result<bool, PolyError> {
        // q = r − 1/2 − p0 − Σ (T2 parts)
        Ok(v <= -0.5 + self.slack(a, band, false)?)
    }
}
