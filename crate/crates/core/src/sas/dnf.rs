use super::{normalize, Atom, Sas, SasError};
use crate::poly::VarEnv;

/// Cap on the number of disjuncts a single formula may expand into.
pub const MAX_DISJUNCTS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum BoolExpr {
    Atom(Atom),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
    Not(Box<BoolExpr>),
}

impl BoolExpr {
    pub fn holds_at(&self, point: &[f64]) -> Result<bool, SasError> {
        Ok(match self {
            BoolExpr::Atom(a) => a.holds_at(point)?,
            BoolExpr::And(xs) => {
                for x in xs {
                    if !x.holds_at(point)? {
                        return Ok(false);
                    }
                }
                true
            }
            BoolExpr::Or(xs) => {
                for x in xs {
                    if x.holds_at(point)? {
                        return Ok(true);
                    }
                }
                false
            }
            BoolExpr::Not(x) => !x.holds_at(point)?,
        })
    }

    // Conjunctions of atoms with negations already pushed inward.
    fn to_dnf(&self, negated: bool) -> Result<Vec<Vec<Atom>>, SasError> {
        match (self, negated) {
            (BoolExpr::Atom(a), false) => Ok(vec![vec![a.clone()]]),
            (BoolExpr::Atom(a), true) => Ok(vec![vec![a.negate()]]),
            (BoolExpr::Not(x), n) => x.to_dnf(!n),
            (BoolExpr::And(xs), false) | (BoolExpr::Or(xs), true) => {
                let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
                for x in xs {
                    let rhs = x.to_dnf(negated)?;
                    if acc.len() * rhs.len() > MAX_DISJUNCTS {
                        return Err(SasError::TooManyDisjuncts(MAX_DISJUNCTS));
                    }
                    let mut next = Vec::with_capacity(acc.len() * rhs.len());
                    for l in &acc {
                        for r in &rhs {
                            let mut c = l.clone();
                            c.extend(r.iter().cloned());
                            next.push(c);
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
            (BoolExpr::Or(xs), false) | (BoolExpr::And(xs), true) => {
                let mut acc = Vec::new();
                for x in xs {
                    acc.extend(x.to_dnf(negated)?);
                    if acc.len() > MAX_DISJUNCTS {
                        return Err(SasError::TooManyDisjuncts(MAX_DISJUNCTS));
                    }
                }
                Ok(acc)
            }
        }
    }
}

/// A disjunction of semi-algebraic systems over one environment.
#[derive(Clone, Debug, PartialEq)]
pub struct Formula {
    disjuncts: Vec<Sas>,
}

impl Formula {
    pub fn new(disjuncts: Vec<Sas>) -> Result<Self, SasError> {
        let first = disjuncts.first().ok_or(SasError::EmptyFormula)?;
        if disjuncts.iter().any(|d| d.env() != first.env()) {
            return Err(SasError::EnvMismatch);
        }
        Ok(Self { disjuncts })
    }

    pub fn single(sas: Sas) -> Self {
        Self {
            disjuncts: vec![sas],
        }
    }

    pub fn disjuncts(&self) -> &[Sas] {
        &self.disjuncts
    }

    pub fn into_disjuncts(self) -> Vec<Sas> {
        self.disjuncts
    }

    pub fn env(&self) -> &VarEnv {
        self.disjuncts[0].env()
    }

    pub fn holds_at(&self, point: &[f64]) -> Result<bool, SasError> {
        for d in &self.disjuncts {
            if d.holds_at(point)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Converts a boolean combination of atoms into disjunctive normal form.
///
/// Negations are pushed to the atoms by trichotomy, then conjunctions are
/// distributed over disjunctions. Disjuncts containing an atom that can
/// never hold (such as `0 > 0`) are dropped.
pub fn dnf_convert(tree: &BoolExpr, env: &VarEnv) -> Result<Formula, SasError> {
    let mut out = Vec::new();
    'conj: for conj in tree.to_dnf(false)? {
        let mut sas = Sas::top(env);
        for atom in conj {
            if atom.poly.env() != env {
                return Err(SasError::EnvMismatch);
            }
            match normalize(&atom.poly, atom.rel) {
                Ok(cs) => {
                    for (p, rel) in cs {
                        sas.push(p, rel)?;
                    }
                }
                Err(SasError::UnsatisfiableAtom(_)) => continue 'conj,
                Err(e) => return Err(e),
            }
        }
        out.push(sas);
    }
    Formula::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::sas::{parse_atom, Relation};

    fn env() -> VarEnv {
        VarEnv::new(["x", "y"]).unwrap()
    }

    fn atom(s: &str) -> BoolExpr {
        BoolExpr::Atom(parse_atom(s, &env()).unwrap())
    }

    #[test]
    fn single_atom() {
        let f = dnf_convert(&atom("x >= 0"), &env()).unwrap();
        assert_eq!(f.disjuncts().len(), 1);
        assert_eq!(f.disjuncts()[0].geqs, vec![parse_poly("x", &env()).unwrap()]);
    }

    #[test]
    fn negated_geq_is_strict_less() {
        let f = dnf_convert(&BoolExpr::Not(Box::new(atom("x >= 0"))), &env()).unwrap();
        let d = &f.disjuncts()[0];
        assert_eq!(d.geqs, vec![parse_poly("-x", &env()).unwrap()]);
        assert_eq!(d.neqs, vec![parse_poly("x", &env()).unwrap()]);
    }

    #[test]
    fn distributes() {
        let e = BoolExpr::And(vec![
            BoolExpr::Or(vec![atom("x >= 0"), atom("y >= 0")]),
            atom("x + y = 1"),
        ]);
        let f = dnf_convert(&e, &env()).unwrap();
        assert_eq!(f.disjuncts().len(), 2);
        assert!(f.disjuncts().iter().all(|d| d.eqs.len() == 1 && d.geqs.len() == 1));
    }

    #[test]
    fn cap_enforced() {
        let pair = BoolExpr::Or(vec![atom("x >= 0"), atom("y >= 0")]);
        let big = BoolExpr::And(vec![pair; 7]);
        assert_eq!(
            dnf_convert(&big, &env()).unwrap_err(),
            SasError::TooManyDisjuncts(MAX_DISJUNCTS)
        );
    }

    #[test]
    fn false_disjuncts_dropped() {
        let zero = crate::poly::Polynomial::zero(&env());
        let never = BoolExpr::Atom(Atom::new(zero, Relation::Gt));
        let f = dnf_convert(&BoolExpr::Or(vec![never.clone(), atom("x > 1")]), &env()).unwrap();
        assert_eq!(f.disjuncts().len(), 1);
        assert_eq!(dnf_convert(&never, &env()).unwrap_err(), SasError::EmptyFormula);
    }
}
