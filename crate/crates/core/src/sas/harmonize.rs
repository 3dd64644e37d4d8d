use std::collections::{BTreeMap, BTreeSet};

use super::{Sas, SasError};
use crate::poly::Polynomial;

/// Definitional equations `v = h(…)` for local variables, checked acyclic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DefEquations {
    defs: BTreeMap<String, Polynomial>,
    order: Vec<String>,
}

impl DefEquations {
    pub fn new(defs: BTreeMap<String, Polynomial>) -> Result<Self, SasError> {
        let order = topological_order(&defs)?;
        Ok(Self { defs, order })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Polynomial> {
        self.defs.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.keys().map(String::as_str)
    }

    /// Each definition with every other defined variable substituted away,
    /// so the right-hand sides mention undefined variables only.
    pub fn resolved(&self) -> Result<BTreeMap<String, Polynomial>, SasError> {
        let mut done: BTreeMap<String, Polynomial> = BTreeMap::new();
        for name in &self.order {
            let rhs = self.defs[name].substitute(&done)?;
            done.insert(name.clone(), rhs);
        }
        Ok(done)
    }
}

// Dependencies first; a definition that reaches itself is an error.
fn topological_order(defs: &BTreeMap<String, Polynomial>) -> Result<Vec<String>, SasError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit(
        name: &str,
        defs: &BTreeMap<String, Polynomial>,
        marks: &mut BTreeMap<String, Mark>,
        out: &mut Vec<String>,
    ) -> Result<(), SasError> {
        match marks.get(name) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Active) => return Err(SasError::CyclicDefinitions(name.to_string())),
            None => {}
        }
        marks.insert(name.to_string(), Mark::Active);
        for dep in defs[name].variable_names() {
            if defs.contains_key(&dep) {
                visit(&dep, defs, marks, out)?;
            }
        }
        marks.insert(name.to_string(), Mark::Done);
        out.push(name.to_string());
        Ok(())
    }
    let mut marks = BTreeMap::new();
    let mut out = Vec::with_capacity(defs.len());
    for name in defs.keys() {
        visit(name, defs, &mut marks, &mut out)?;
    }
    Ok(out)
}

/// Which variables the caller declares visible to both systems.
#[derive(Clone, Debug, PartialEq)]
pub enum SharedVars {
    All,
    Only(BTreeSet<String>),
}

impl SharedVars {
    pub fn contains(&self, name: &str) -> bool {
        match self {
            SharedVars::All => true,
            SharedVars::Only(s) => s.contains(name),
        }
    }
}

/// Eliminates every defined variable from both systems and drops it from the
/// environment. Variables left in only one system must be declared shared.
pub fn harmonize_variables(
    t1: &Sas,
    t2: &Sas,
    defs: &DefEquations,
    shared: &SharedVars,
) -> Result<(Sas, Sas), SasError> {
    if t1.env() != t2.env() {
        return Err(SasError::EnvMismatch);
    }
    let bindings = defs.resolved()?;
    let s1 = t1.substitute(&bindings)?;
    let s2 = t2.substitute(&bindings)?;
    let env = t1.env().without(bindings.keys().map(String::as_str));
    let s1 = s1.reembed(&env)?;
    let s2 = s2.reembed(&env)?;
    let v1 = s1.variable_names();
    let v2 = s2.variable_names();
    if let Some(v) = v1.symmetric_difference(&v2).find(|v| !shared.contains(v)) {
        return Err(SasError::MissingDefinition(v.clone()));
    }
    Ok((s1, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, VarEnv};

    fn p(s: &str, env: &VarEnv) -> Polynomial {
        parse_poly(s, env).unwrap()
    }

    #[test]
    fn running_example_unchanged() {
        let env = VarEnv::new(["x", "y", "x'", "y'"]).unwrap();
        let t1 = Sas::new(
            &env,
            vec![p("1 - x^2 - y^2", &env)],
            vec![],
            vec![p("x^2 + y - 1 - x'", &env), p("y + x'*y + 1 - y'", &env)],
        )
        .unwrap();
        let t2 = Sas::new(&env, vec![p("x'^2 - 2*y'^2 - 4", &env)], vec![], vec![]).unwrap();
        let (a, b) = harmonize_variables(&t1, &t2, &DefEquations::empty(), &SharedVars::All).unwrap();
        assert_eq!((a, b), (t1.clone(), t2.clone()));
        // with only the primed variables shared, x and y have no definition
        let primed = SharedVars::Only(["x'".to_string(), "y'".to_string()].into());
        assert_eq!(
            harmonize_variables(&t1, &t2, &DefEquations::empty(), &primed).unwrap_err(),
            SasError::MissingDefinition("x".into())
        );
    }

    #[test]
    fn local_eliminated() {
        let env = VarEnv::new(["a", "b", "v"]).unwrap();
        let t1 = Sas::new(&env, vec![p("v - 1", &env)], vec![], vec![]).unwrap();
        let t2 = Sas::new(&env, vec![p("-a - b", &env)], vec![], vec![]).unwrap();
        let defs = DefEquations::new([("v".to_string(), p("a^2 + b", &env))].into()).unwrap();
        let shared = SharedVars::Only(["a".to_string(), "b".to_string()].into());
        let (s1, s2) = harmonize_variables(&t1, &t2, &defs, &shared).unwrap();
        assert_eq!(s1.env().names(), ["a", "b"]);
        assert_eq!(s1.geqs, vec![p("a^2 + b - 1", s1.env())]);
        assert_eq!(s2.geqs, vec![p("-a - b", s2.env())]);
    }

    #[test]
    fn chained_definitions_resolve() {
        let env = VarEnv::new(["a", "u", "v"]).unwrap();
        let defs = DefEquations::new(
            [
                ("u".to_string(), p("a + 1", &env)),
                ("v".to_string(), p("u*u", &env)),
            ]
            .into(),
        )
        .unwrap();
        let r = defs.resolved().unwrap();
        assert_eq!(r["v"], p("a^2 + 2*a + 1", &env));
    }

    #[test]
    fn missing_and_cyclic() {
        let env = VarEnv::new(["a", "w"]).unwrap();
        let t1 = Sas::new(&env, vec![p("w", &env)], vec![], vec![]).unwrap();
        let t2 = Sas::new(&env, vec![p("a", &env)], vec![], vec![]).unwrap();
        let shared = SharedVars::Only(["a".to_string()].into());
        assert_eq!(
            harmonize_variables(&t1, &t2, &DefEquations::empty(), &shared).unwrap_err(),
            SasError::MissingDefinition("w".into())
        );
        let cyc = DefEquations::new(
            [
                ("a".to_string(), p("w + 1", &env)),
                ("w".to_string(), p("a", &env)),
            ]
            .into(),
        );
        assert!(matches!(cyc, Err(SasError::CyclicDefinitions(_))));
        let selfref = DefEquations::new([("w".to_string(), p("w + 1", &env))].into());
        assert!(matches!(selfref, Err(SasError::CyclicDefinitions(_))));
    }
}
