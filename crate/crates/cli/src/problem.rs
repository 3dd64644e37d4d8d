//! Problem files: TOML with `vars`, `phi`, `psi` and optional `shared`,
//! `defs`, `box` and `options` tables.
//!
//! `phi`/`psi` are either DNF arrays of `{ geq, neq, eq }` tables (each a
//! list of polynomial strings meaning `p ≥ 0`, `p ≠ 0`, `p = 0`) or an
//! expression tree of `{ and = [...] }`, `{ or = [...] }`, `{ not = ... }`
//! nodes over atom strings such as `"x^2 + y > 1"`.

use std::collections::{BTreeMap, BTreeSet};

use psatz::poly::{parse_poly, PolyError, Polynomial, VarEnv};
use psatz::sas::{dnf_convert, parse_atom, BoolExpr, DefEquations, Formula, Sas, SasError, SharedVars};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Toml(String),
    #[error("in {place}: {source}")]
    Poly { place: String, source: PolyError },
    #[error("in {place}: {source}")]
    Sas { place: String, source: SasError },
    #[error("`{0}` is not a declared variable")]
    UnknownVariable(String),
    #[error("box interval for `{0}` is empty or not finite")]
    BadInterval(String),
    #[error("option `{name}`: {message}")]
    BadOption { name: &'static str, message: String },
}

/// Per-file overrides of run settings; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feas_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq_band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shared: Option<Vec<String>>,
    phi: RawFormula,
    psi: RawFormula,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    defs: BTreeMap<String, String>,
    #[serde(default, rename = "box", skip_serializing_if = "BTreeMap::is_empty")]
    sample_box: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "is_default")]
    options: RunOptions,
}

fn is_default(o: &RunOptions) -> bool {
    *o == RunOptions::default()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawFormula {
    Dnf(Vec<RawConj>),
    Tree(RawExpr),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConj {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    geq: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    neq: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    eq: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawExpr {
    Atom(String),
    And {
        and: Vec<RawExpr>,
    },
    Or {
        or: Vec<RawExpr>,
    },
    Not {
        not: Box<RawExpr>,
    },
}

/// A parsed problem over one variable environment.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub env: VarEnv,
    pub phi: Formula,
    pub psi: Formula,
    pub defs: DefEquations,
    pub shared: SharedVars,
    pub sample_box: BTreeMap<String, (f64, f64)>,
    pub options: RunOptions,
}

impl Problem {
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let raw: RawProblem = toml::from_str(text).map_err(|e| ProblemError::Toml(e.to_string()))?;
        let env = VarEnv::new(raw.vars.iter().map(String::as_str)).map_err(|source| ProblemError::Poly {
            place: "vars".into(),
            source,
        })?;
        let known = |v: &str| -> Result<(), ProblemError> {
            if env.index_of(v).is_some() {
                Ok(())
            } else {
                Err(ProblemError::UnknownVariable(v.to_string()))
            }
        };
        let shared = match raw.shared {
            None => SharedVars::All,
            Some(vs) => {
                for v in &vs {
                    known(v)?;
                }
                SharedVars::Only(vs.into_iter().collect::<BTreeSet<_>>())
            }
        };
        let mut defs = BTreeMap::new();
        for (name, rhs) in &raw.defs {
            known(name)?;
            let p = parse_poly(rhs, &env).map_err(|e| ProblemError::Poly {
                place: format!("defs.{name}"),
                source: e.into(),
            })?;
            defs.insert(name.clone(), p);
        }
        let defs = DefEquations::new(defs).map_err(|source| ProblemError::Sas {
            place: "defs".into(),
            source,
        })?;
        let mut sample_box = BTreeMap::new();
        for (name, [lo, hi]) in raw.sample_box {
            known(&name)?;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ProblemError::BadInterval(name));
            }
            sample_box.insert(name, (lo, hi));
        }
        Ok(Self {
            phi: formula(&raw.phi, &env, "phi")?,
            psi: formula(&raw.psi, &env, "psi")?,
            env,
            defs,
            shared,
            sample_box,
            options: raw.options,
        })
    }

    /// Canonical TOML: formulas as DNF arrays, polynomials in display form.
    pub fn to_toml(&self) -> String {
        let conj = |s: &Sas| RawConj {
            geq: s.geqs.iter().map(Polynomial::to_string).collect(),
            neq: s.neqs.iter().map(Polynomial::to_string).collect(),
            eq: s.eqs.iter().map(Polynomial::to_string).collect(),
        };
        let dnf = |f: &Formula| RawFormula::Dnf(f.disjuncts().iter().map(conj).collect());
        let raw = RawProblem {
            vars: self.env.names().to_vec(),
            shared: match &self.shared {
                SharedVars::All => None,
                SharedVars::Only(s) => Some(s.iter().cloned().collect()),
            },
            phi: dnf(&self.phi),
            psi: dnf(&self.psi),
            defs: self
                .defs
                .names()
                .map(|n| (n.to_string(), self.defs.get(n).expect("listed name").to_string()))
                .collect(),
            sample_box: self.sample_box.iter().map(|(k, &(a, b))| (k.clone(), [a, b])).collect(),
            options: self.options.clone(),
        };
        toml::to_string(&raw).expect("problem serializes")
    }
}

fn formula(raw: &RawFormula, env: &VarEnv, place: &str) -> Result<Formula, ProblemError> {
    let sas_err = |source| ProblemError::Sas {
        place: place.to_string(),
        source,
    };
    match raw {
        RawFormula::Dnf(conjs) => {
            let mut out = Vec::with_capacity(conjs.len());
            for (k, c) in conjs.iter().enumerate() {
                let polys = |v: &[String], kind: &str| -> Result<Vec<Polynomial>, ProblemError> {
                    v.iter()
                        .map(|s| {
                            parse_poly(s, env).map_err(|e| ProblemError::Poly {
                                place: format!("{place}[{k}].{kind}"),
                                source: e.into(),
                            })
                        })
                        .collect()
                };
                let s = Sas::new(env, polys(&c.geq, "geq")?, polys(&c.neq, "neq")?, polys(&c.eq, "eq")?)
                    .map_err(sas_err)?;
                out.push(s);
            }
            Formula::new(out).map_err(sas_err)
        }
        RawFormula::Tree(e) => {
            let tree = expr(e, env).map_err(sas_err)?;
            dnf_convert(&tree, env).map_err(sas_err)
        }
    }
}

fn expr(e: &RawExpr, env: &VarEnv) -> Result<BoolExpr, SasError> {
    Ok(match e {
        RawExpr::Atom(s) => BoolExpr::Atom(parse_atom(s, env)?),
        RawExpr::And { and } => BoolExpr::And(and.iter().map(|x| expr(x, env)).collect::<Result<_, _>>()?),
        RawExpr::Or { or } => BoolExpr::Or(or.iter().map(|x| expr(x, env)).collect::<Result<_, _>>()?),
        RawExpr::Not { not } => BoolExpr::Not(Box::new(expr(not, env)?)),
    })
}
