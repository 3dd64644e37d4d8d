use std::fmt;

use serde::{Deserialize, Serialize};

use super::SasError;
use crate::poly::{parse_poly, Polynomial, VarEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
}

impl Relation {
    /// The relation satisfied exactly where `self` fails.
    pub fn negate(self) -> Relation {
        match self {
            Relation::Gt => Relation::Le,
            Relation::Ge => Relation::Lt,
            Relation::Lt => Relation::Ge,
            Relation::Le => Relation::Gt,
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
        }
    }

    pub fn holds(self, v: f64) -> bool {
        match self {
            Relation::Gt => v > 0.0,
            Relation::Ge => v >= 0.0,
            Relation::Lt => v < 0.0,
            Relation::Le => v <= 0.0,
            Relation::Eq => v == 0.0,
            Relation::Ne => v != 0.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ne => "!=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The three constraint shapes a [`super::Sas`] stores, each against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CanonicalRelation {
    Geq,
    Neq,
    Eq,
}

/// `poly REL 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub poly: Polynomial,
    pub rel: Relation,
}

impl Atom {
    pub fn new(poly: Polynomial, rel: Relation) -> Self {
        Self { poly, rel }
    }

    pub fn negate(&self) -> Atom {
        Atom::new(self.poly.clone(), self.rel.negate())
    }

    pub fn holds_at(&self, point: &[f64]) -> Result<bool, SasError> {
        Ok(self.rel.holds(self.poly.eval(point)?))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.poly, self.rel)
    }
}

/// Rewrites `expr REL 0` into `≥`/`≠`/`=` constraints with the same solution
/// set. Atoms that hold everywhere (such as `0 ≥ 0`) normalize to nothing.
pub fn normalize(
    expr: &Polynomial,
    rel: Relation,
) -> Result<Vec<(Polynomial, CanonicalRelation)>, SasError> {
    use CanonicalRelation as C;
    if expr.is_zero() {
        return match rel {
            Relation::Ge | Relation::Le | Relation::Eq => Ok(Vec::new()),
            Relation::Gt | Relation::Lt | Relation::Ne => {
                Err(SasError::UnsatisfiableAtom(format!("0 {rel} 0")))
            }
        };
    }
    let neg = || -expr;
    Ok(match rel {
        Relation::Gt => vec![(expr.clone(), C::Geq), (expr.clone(), C::Neq)],
        Relation::Ge => vec![(expr.clone(), C::Geq)],
        Relation::Lt => vec![(neg(), C::Geq), (expr.clone(), C::Neq)],
        Relation::Le => vec![(neg(), C::Geq)],
        Relation::Eq => vec![(expr.clone(), C::Eq)],
        Relation::Ne => vec![(expr.clone(), C::Neq)],
    })
}

const RELATION_TOKENS: &[(&str, Relation)] = &[
    (">=", Relation::Ge),
    ("<=", Relation::Le),
    ("!=", Relation::Ne),
    ("==", Relation::Eq),
    ("≥", Relation::Ge),
    ("≤", Relation::Le),
    ("≠", Relation::Ne),
    (">", Relation::Gt),
    ("<", Relation::Lt),
    ("=", Relation::Eq),
];

/// Parses `lhs REL rhs` into the atom `lhs - rhs REL 0`.
pub fn parse_atom(text: &str, env: &VarEnv) -> Result<Atom, SasError> {
    let mut found: Option<(usize, &str, Relation)> = None;
    for (tok, rel) in RELATION_TOKENS {
        if let Some(pos) = text.find(tok) {
            // earliest operator wins; among equal positions the longer token
            // is listed first
            if found.is_none_or(|(p, _, _)| pos < p) {
                found = Some((pos, tok, *rel));
            }
        }
    }
    let (pos, tok, rel) = found.ok_or_else(|| SasError::MalformedAtom(text.to_string()))?;
    let (lhs, rhs) = (&text[..pos], &text[pos + tok.len()..]);
    if RELATION_TOKENS.iter().any(|(t, _)| rhs.contains(t)) {
        return Err(SasError::MalformedAtom(text.to_string()));
    }
    let lhs = parse_poly(lhs, env).map_err(crate::poly::PolyError::from)?;
    let rhs = parse_poly(rhs, env).map_err(crate::poly::PolyError::from)?;
    Ok(Atom::new(&lhs - &rhs, rel))
}
