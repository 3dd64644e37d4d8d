//! Bounded-degree Positivstellensatz certificates.
//!
//! The identity `1 + p0 + Σ pᵢfᵢ + g + Σ qᵢhᵢ ≡ 0` is encoded with one Gram
//! block per SOS unknown over a shared monomial basis; matching coefficients
//! gives one linear constraint per monomial, and the resulting SDP is solved
//! for feasibility.

mod scaling;
mod template;

pub use template::{build_identity_template, BlockRole, Template};

use std::fmt::Write as _;

use log::{debug, info};
use thiserror::Error;

use crate::poly::{GramBasis, PolyError, Polynomial};
use crate::sdp::{self, eigenvalues, min_eigenvalue, psd_factor, SdpError, SdpSolution, SdpStatus, SolverConfig, SymMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("degree bound {0} is odd")]
    OddDegree(u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

/// `Zᵀ Q Z` for a Gram matrix over a monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SosPoly {
    pub basis: GramBasis,
    pub gram: SymMatrix,
}

impl SosPoly {
    pub fn to_polynomial(&self) -> Polynomial {
        let z = self.basis.monomials();
        let mut terms = Vec::with_capacity(z.len() * (z.len() + 1) / 2);
        for a in 0..z.len() {
            for b in a..z.len() {
                let w = if a == b { 1.0 } else { 2.0 };
                terms.push((z[a].mul(&z[b]), w * self.gram.get(a, b)));
            }
        }
        Polynomial::from_terms(self.basis.env(), terms)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.gram).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertConfig {
    pub solver: SolverConfig,
    /// Relative bound on the identity residual and on negative Gram
    /// eigenvalues.
    pub accept_tol: f64,
    /// Solve in power-of-two rescaled variables and map the certificate back.
    pub rescale: bool,
}

impl Default for CertConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            accept_tol: 1e-6,
            rescale: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub degree: u32,
    /// Generators `fᵢ` as handed in (products already formed).
    pub fs: Vec<Polynomial>,
    pub hs: Vec<Polynomial>,
    pub p0: SosPoly,
    /// One multiplier per generator.
    pub p: Vec<SosPoly>,
    /// Monoid element, already powered by the caller.
    pub g: Polynomial,
    /// Equation multipliers `qᵢ = qᵢ₁ − qᵢ₂`.
    pub q: Vec<Polynomial>,
    pub residual: Polynomial,
}

impl Certificate {
    /// The summands `1, p0, pᵢfᵢ, g, qᵢhᵢ` of the identity.
    pub fn summands(&self) -> Vec<Polynomial> {
        let env = self.g.env();
        let mut out = vec![Polynomial::one(env), self.p0.to_polynomial()];
        for (p, f) in self.p.iter().zip(&self.fs) {
            out.push(&p.to_polynomial() * f);
        }
        out.push(self.g.clone());
        for (q, h) in self.q.iter().zip(&self.hs) {
            out.push(q * h);
        }
        out
    }

    /// Largest coefficient magnitude among the summands, at least 1.
    pub fn scale(&self) -> f64 {
        self.summands()
            .iter()
            .map(Polynomial::max_abs_coeff)
            .fold(1.0, f64::max)
    }

    pub fn grams(&self) -> impl Iterator<Item = &SosPoly> {
        std::iter::once(&self.p0).chain(&self.p)
    }

    /// Text report with coefficients at the given number of decimals.
    pub fn report(&self, precision: usize) -> String {
        let mut out = String::new();
        let show = |p: &Polynomial| p.display_with(Some(precision));
        writeln!(out, "certificate at degree bound {}", self.degree).unwrap();
        let gram_line = |out: &mut String, name: String, s: &SosPoly| {
            let (lo, hi) = eig_range(&s.gram);
            writeln!(out, "  {name} = {}", show(&s.to_polynomial())).unwrap();
            writeln!(
                out,
                "    gram {}x{}, eigenvalues in [{lo:.3e}, {hi:.3e}]",
                s.gram.dim(),
                s.gram.dim()
            )
            .unwrap();
        };
        gram_line(&mut out, "p0".into(), &self.p0);
        for (i, (p, f)) in self.p.iter().zip(&self.fs).enumerate() {
            gram_line(&mut out, format!("p{} (for {})", i + 1, show(f)), p);
        }
        writeln!(out, "  g = {}", show(&self.g)).unwrap();
        for (i, (q, h)) in self.q.iter().zip(&self.hs).enumerate() {
            writeln!(out, "  q{} (for {}) = {}", i + 1, show(h), show(q)).unwrap();
        }
        writeln!(out, "  residual max |coeff| = {:.3e}", self.residual.max_abs_coeff()).unwrap();
        out
    }
}

fn eig_range(m: &SymMatrix) -> (f64, f64) {
    match eigenvalues(m) {
        Ok(v) if !v.is_empty() => (v[0], v[v.len() - 1]),
        _ => (f64::NAN, f64::NAN),
    }
}

/// `1 + p0 + Σ pᵢfᵢ + g + Σ qᵢhᵢ`, expanded.
pub fn residual(c: &Certificate) -> Polynomial {
    let env = c.g.env();
    c.summands()
        .iter()
        .fold(Polynomial::zero(env), |acc, s| &acc + s)
}

/// Squares `(wᵢ, ℓᵢ)` with `Σ wᵢ ℓᵢ² ≈ ZᵀQZ`.
pub fn extract_sos(s: &SosPoly, tol: f64) -> Result<Vec<(f64, Polynomial)>, CertError> {
    let z = s.basis.monomials();
    let env = s.basis.env();
    let factors = psd_factor(&s.gram, tol)?;
    Ok(factors
        .into_iter()
        .map(|(w, v)| {
            let l = Polynomial::from_terms(env, z.iter().cloned().zip(v));
            (w, l)
        })
        .collect())
}

/// Everything produced by one certificate search.
#[derive(Clone, Debug)]
pub struct CertOutcome {
    pub template: Template,
    pub solution: Option<SdpSolution>,
    pub certificate: Option<Certificate>,
    /// Why no certificate was produced.
    pub reason: Option<String>,
}

fn scaled_inputs(
    fs: &[Polynomial],
    g: &Polynomial,
    hs: &[Polynomial],
    exps: &[i32],
) -> (Vec<Polynomial>, Polynomial, Vec<Polynomial>) {
    let sc = |p: &Polynomial| scaling::to_scaled(p, exps);
    (fs.iter().map(sc).collect(), sc(g), hs.iter().map(sc).collect())
}

/// The SDP actually handed to the solver, in rescaled variables when
/// `cfg.rescale` finds a scaling other than 1; the exponents are `log₂` of
/// the per-variable factors.
pub fn solver_template(
    fs: &[Polynomial],
    g: &Polynomial,
    hs: &[Polynomial],
    b: u32,
    cfg: &CertConfig,
) -> Result<(Template, Option<Vec<i32>>), CertError> {
    let exps = if cfg.rescale {
        let polys: Vec<&Polynomial> = fs.iter().chain(hs).chain(std::iter::once(g)).collect();
        let e = scaling::variable_exponents(&polys, g.env().len());
        e.iter().any(|&k| k != 0).then_some(e)
    } else {
        None
    };
    let template = match &exps {
        Some(e) => {
            debug!("certgen b={b}: variable scales 2^{e:?}");
            let (sfs, sg, shs) = scaled_inputs(fs, g, hs, e);
            build_identity_template(&sfs, &sg, &shs, b)?
        }
        None => build_identity_template(fs, g, hs, b)?,
    };
    Ok((template, exps))
}

pub fn certificate_generation(
    fs: &[Polynomial],
    g: &Polynomial,
    hs: &[Polynomial],
    b: u32,
    cfg: &CertConfig,
) -> Result<Option<Certificate>, CertError> {
    Ok(certificate_generation_detailed(fs, g, hs, b, cfg)?.certificate)
}

pub fn certificate_generation_detailed(
    fs: &[Polynomial],
    g: &Polynomial,
    hs: &[Polynomial],
    b: u32,
    cfg: &CertConfig,
) -> Result<CertOutcome, CertError> {
    let (template, exps) = solver_template(fs, g, hs, b, cfg)?;
    debug!(
        "certgen b={b}: {} blocks of size {}, {} constraints",
        template.problem.block_dims.len(),
        template.basis.len(),
        template.problem.num_constraints()
    );
    let (verdict, solution) = sdp::feasibility_with_solution(&template.problem, &cfg.solver);
    let reject = |template: Template, solution, reason: String| {
        info!("certgen b={b}: no certificate ({reason})");
        Ok(CertOutcome {
            template,
            solution,
            certificate: None,
            reason: Some(reason),
        })
    };
    let (x, sol) = match (verdict, solution) {
        (sdp::Feasibility::Feasible(x), Some(sol)) => (x, sol),
        (_, sol) => {
            let status = sol.as_ref().map(|s| s.status);
            let reason = match status {
                Some(SdpStatus::Infeasible) => "SDP infeasible".to_string(),
                Some(st) => format!("SDP solver stopped with {st:?}"),
                None => "SDP solver rejected the problem".to_string(),
            };
            return reject(template, sol, reason);
        }
    };
    let cert = match &exps {
        Some(e) => {
            let (sfs, sg, shs) = scaled_inputs(fs, g, hs, e);
            scaling::certificate_from_scaled(template.certificate_from(&x, &sfs, &sg, &shs), e, fs, g, hs)
        }
        None => template.certificate_from(&x, fs, g, hs),
    };
    let scale = cert.scale();
    let res = cert.residual.max_abs_coeff();
    if res > cfg.accept_tol * scale {
        let reason = format!("identity residual {res:.3e} exceeds {:.1e} x scale {scale:.3e}", cfg.accept_tol);
        return reject(template, Some(sol), reason);
    }
    let worst = cert.grams().map(SosPoly::min_eigenvalue).fold(f64::INFINITY, f64::min);
    if !(worst >= -cfg.accept_tol * scale) {
        let reason = format!("Gram matrix eigenvalue {worst:.3e} below tolerance");
        return reject(template, Some(sol), reason);
    }
    Ok(CertOutcome {
        template,
        solution: Some(sol),
        certificate: Some(cert),
        reason: None,
    })
}
