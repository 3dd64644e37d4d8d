use std::collections::BTreeMap;

use super::Sas;
use crate::poly::Polynomial;

#[derive(Clone, Debug, PartialEq)]
pub struct ArchimedeanReport {
    pub ok: bool,
    /// Variables lacking an upper or lower bound, by name.
    pub missing: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Bound {
    lo: Option<f64>,
    hi: Option<f64>,
}

impl Bound {
    fn lower(&mut self, v: f64) {
        self.lo = Some(self.lo.map_or(v, |l| l.max(v)));
    }

    fn upper(&mut self, v: f64) {
        self.hi = Some(self.hi.map_or(v, |h| h.min(v)));
    }
}

// `a*x + c ≥ 0` with a single variable, or the ball `N - Σ xᵢ² ≥ 0` with
// unit coefficients.
fn record(f: &Polynomial, bounds: &mut BTreeMap<usize, Bound>) {
    let vars = f.variables();
    if vars.is_empty() || f.degree().unwrap_or(0) > 2 {
        return;
    }
    let c0 = f.constant_term();
    if vars.len() == 1 && f.degree() == Some(1) {
        let i = *vars.iter().next().expect("one variable");
        let a = f
            .terms()
            .find(|(m, _)| m.degree() == 1)
            .map(|(_, c)| c)
            .expect("linear term");
        let b = bounds.entry(i).or_default();
        if a > 0.0 {
            b.lower(-c0 / a);
        } else {
            b.upper(-c0 / a);
        }
        return;
    }
    let mut squares = Vec::new();
    for (m, c) in f.terms() {
        match m.degree() {
            0 => {}
            2 if c == -1.0 && m.exponents().iter().any(|&e| e == 2) => {
                let i = m.exponents().iter().position(|&e| e == 2).expect("square");
                squares.push(i);
            }
            _ => return,
        }
    }
    if c0 <= 0.0 {
        return;
    }
    let r = c0.sqrt();
    for i in squares {
        let b = bounds.entry(i).or_default();
        b.lower(-r);
        b.upper(r);
    }
}

fn collect(systems: &[&Sas]) -> BTreeMap<usize, Bound> {
    let mut bounds = BTreeMap::new();
    for s in systems {
        for f in &s.geqs {
            record(f, &mut bounds);
        }
    }
    bounds
}

/// Syntactic check that every variable occurring in either system is boxed
/// by the union of their `≥` constraints.
pub fn check_archimedean_form(t1: &Sas, t2: &Sas) -> ArchimedeanReport {
    let bounds = collect(&[t1, t2]);
    let vars: std::collections::BTreeSet<usize> = t1.variables().union(&t2.variables()).copied().collect();
    let missing: Vec<String> = vars
        .into_iter()
        .filter(|i| !matches!(bounds.get(i), Some(Bound { lo: Some(_), hi: Some(_) })))
        .map(|i| t1.env().name(i).to_string())
        .collect();
    ArchimedeanReport {
        ok: missing.is_empty(),
        missing,
    }
}

/// Tightest interval per variable implied by the recognized bound patterns,
/// for variables bounded on both sides.
pub fn variable_bounds(systems: &[&Sas]) -> BTreeMap<usize, (f64, f64)> {
    collect(systems)
        .into_iter()
        .filter_map(|(i, b)| Some((i, (b.lo?, b.hi?))))
        .collect()
}
