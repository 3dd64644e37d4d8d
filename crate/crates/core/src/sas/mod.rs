//! Semi-algebraic systems: conjunctions of `f ≥ 0`, `g ≠ 0` and `h = 0`
//! constraints, boolean formulas over them, variable harmonization and the
//! syntactic boundedness check used by the Archimedean track.

mod archimedean;
mod atom;
mod dnf;
mod harmonize;

pub use archimedean::{check_archimedean_form, variable_bounds, ArchimedeanReport};
pub use atom::{normalize, parse_atom, Atom, CanonicalRelation, Relation};
pub use dnf::{dnf_convert, BoolExpr, Formula, MAX_DISJUNCTS};
pub use harmonize::{harmonize_variables, DefEquations, SharedVars};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::poly::{PolyError, Polynomial, VarEnv};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SasError {
    #[error("constraint 0 != 0 can never hold")]
    ZeroNeq,
    #[error("atom `{0}` is unsatisfiable")]
    UnsatisfiableAtom(String),
    #[error("formula has no satisfiable disjunct")]
    EmptyFormula,
    #[error("DNF expansion exceeds {0} disjuncts")]
    TooManyDisjuncts(usize),
    #[error("variable `{0}` occurs in only one system and has no definition")]
    MissingDefinition(String),
    #[error("definitions are cyclic through `{0}`")]
    CyclicDefinitions(String),
    #[error("cannot parse atom `{0}`: expected `lhs REL rhs`")]
    MalformedAtom(String),
    #[error("systems live in different variable environments")]
    EnvMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// One conjunction `geqs ≥ 0 ∧ neqs ≠ 0 ∧ eqs = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sas {
    env: VarEnv,
    pub geqs: Vec<Polynomial>,
    pub neqs: Vec<Polynomial>,
    pub eqs: Vec<Polynomial>,
}

impl Sas {
    pub fn new(
        env: &VarEnv,
        geqs: Vec<Polynomial>,
        neqs: Vec<Polynomial>,
        eqs: Vec<Polynomial>,
    ) -> Result<Self, SasError> {
        if geqs.iter().chain(&neqs).chain(&eqs).any(|p| p.env() != env) {
            return Err(SasError::EnvMismatch);
        }
        if neqs.iter().any(Polynomial::is_zero) {
            return Err(SasError::ZeroNeq);
        }
        Ok(Self {
            env: env.clone(),
            geqs,
            neqs,
            eqs,
        })
    }

    /// The empty conjunction (always true).
    pub fn top(env: &VarEnv) -> Self {
        Self {
            env: env.clone(),
            geqs: Vec::new(),
            neqs: Vec::new(),
            eqs: Vec::new(),
        }
    }

    pub fn from_canonical<I>(env: &VarEnv, constraints: I) -> Result<Self, SasError>
    where
        I: IntoIterator<Item = (Polynomial, CanonicalRelation)>,
    {
        let mut s = Self::top(env);
        for (p, rel) in constraints {
            s.push(p, rel)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, p: Polynomial, rel: CanonicalRelation) -> Result<(), SasError> {
        if p.env() != &self.env {
            return Err(SasError::EnvMismatch);
        }
        match rel {
            CanonicalRelation::Geq => self.geqs.push(p),
            CanonicalRelation::Neq if p.is_zero() => return Err(SasError::ZeroNeq),
            CanonicalRelation::Neq => self.neqs.push(p),
            CanonicalRelation::Eq => self.eqs.push(p),
        }
        Ok(())
    }

    pub fn env(&self) -> &VarEnv {
        &self.env
    }

    pub fn len(&self) -> usize {
        self.geqs.len() + self.neqs.len() + self.eqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn polynomials(&self) -> impl Iterator<Item = &Polynomial> {
        self.geqs.iter().chain(&self.neqs).chain(&self.eqs)
    }

    /// Indices of variables that occur in some constraint.
    pub fn variables(&self) -> BTreeSet<usize> {
        self.polynomials().flat_map(|p| p.variables()).collect()
    }

    pub fn variable_names(&self) -> BTreeSet<String> {
        self.variables()
            .into_iter()
            .map(|i| self.env.name(i).to_string())
            .collect()
    }

    /// Exact satisfaction at a point.
    pub fn holds_at(&self, point: &[f64]) -> Result<bool, SasError> {
        for p in &self.geqs {
            if p.eval(point)? < 0.0 {
                return Ok(false);
            }
        }
        for p in &self.neqs {
            if p.eval(point)? == 0.0 {
                return Ok(false);
            }
        }
        for p in &self.eqs {
            if p.eval(point)? != 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn conjoin(&self, other: &Sas) -> Result<Sas, SasError> {
        if self.env != other.env {
            return Err(SasError::EnvMismatch);
        }
        let mut out = self.clone();
        out.geqs.extend(other.geqs.iter().cloned());
        out.neqs.extend(other.neqs.iter().cloned());
        out.eqs.extend(other.eqs.iter().cloned());
        Ok(out)
    }

    pub fn substitute(&self, bindings: &BTreeMap<String, Polynomial>) -> Result<Sas, SasError> {
        let map = |ps: &[Polynomial]| -> Result<Vec<Polynomial>, SasError> {
            ps.iter()
                .map(|p| p.substitute(bindings).map_err(SasError::from))
                .collect()
        };
        Sas::new(&self.env, map(&self.geqs)?, map(&self.neqs)?, map(&self.eqs)?)
    }

    pub fn reembed(&self, env: &VarEnv) -> Result<Sas, SasError> {
        let map = |ps: &[Polynomial]| -> Result<Vec<Polynomial>, SasError> {
            ps.iter()
                .map(|p| p.reembed(env).map_err(SasError::from))
                .collect()
        };
        Sas::new(env, map(&self.geqs)?, map(&self.neqs)?, map(&self.eqs)?)
    }

    /// Rewrites every `h = 0` as the pair `h ≥ 0`, `-h ≥ 0`.
    pub fn eqs_as_geqs(&self) -> Sas {
        let mut out = self.clone();
        for h in std::mem::take(&mut out.eqs) {
            let neg = -&h;
            out.geqs.push(h);
            out.geqs.push(neg);
        }
        out
    }
}
