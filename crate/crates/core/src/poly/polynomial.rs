use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{Monomial, PolyError, VarEnv};

/// Coefficients of magnitude at most this are dropped after every operation.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Sparse polynomial with `f64` coefficients in canonical form.
#[derive(Clone)]
pub struct Polynomial {
    env: VarEnv,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(env: &VarEnv) -> Self {
        Self {
            env: env.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(env: &VarEnv, c: f64) -> Self {
        Self::from_terms(env, [(Monomial::one(env.len()), c)])
    }

    pub fn one(env: &VarEnv) -> Self {
        Self::constant(env, 1.0)
    }

    pub fn var(env: &VarEnv, name: &str) -> Result<Self, PolyError> {
        let i = env
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(Self::var_at(env, i))
    }

    pub fn var_at(env: &VarEnv, i: usize) -> Self {
        Self::from_terms(env, [(Monomial::var(env.len(), i), 1.0)])
    }

    pub fn monomial(env: &VarEnv, m: Monomial, c: f64) -> Self {
        Self::from_terms(env, [(m, c)])
    }

    /// Sums duplicate monomials and drops negligible coefficients.
    pub fn from_terms<I>(env: &VarEnv, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        let mut map: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (m, c) in terms {
            debug_assert_eq!(m.nvars(), env.len());
            *map.entry(m).or_insert(0.0) += c;
        }
        let mut p = Self {
            env: env.clone(),
            terms: map,
        };
        p.canonicalize();
        p
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| c.abs() > DROP_TOLERANCE);
    }

    pub fn env(&self) -> &VarEnv {
        &self.env
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` stands for the degree of the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&Monomial::one(self.env.len()))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// Indices of variables that occur with a positive exponent.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut vars = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, e) in m.exponents().iter().enumerate() {
                if *e > 0 {
                    vars.insert(i);
                }
            }
        }
        vars
    }

    pub fn variable_names(&self) -> BTreeSet<String> {
        self.variables()
            .into_iter()
            .map(|i| self.env.name(i).to_string())
            .collect()
    }

    fn check_env(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.env == other.env {
            Ok(())
        } else {
            Err(PolyError::EnvMismatch)
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_env(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_insert(0.0) += c;
        }
        out.canonicalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_env(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_insert(0.0) -= c;
        }
        out.canonicalize();
        Ok(out)
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_env(other)?;
        let mut terms: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *terms.entry(ma.mul(mb)).or_insert(0.0) += ca * cb;
            }
        }
        let mut out = Polynomial {
            env: self.env.clone(),
            terms,
        };
        out.canonicalize();
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial {
            env: self.env.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        };
        out.canonicalize();
        out
    }

    pub fn add_constant(&self, c: f64) -> Polynomial {
        self + &Polynomial::constant(&self.env, c)
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::one(&self.env);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.env.len() {
            return Err(PolyError::DimensionMismatch {
                expected: self.env.len(),
                got: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }

    /// Partial derivative with respect to the variable at index `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponents()[i];
            (e > 0).then(|| {
                let mut exps = m.exponents().to_vec();
                exps[i] -= 1;
                (Monomial::from_exponents(exps), c * e as f64)
            })
        });
        Polynomial::from_terms(&self.env, terms)
    }

    /// Replaces each bound variable by its polynomial and expands.
    ///
    /// Replacements must live in the same environment as `self`.
    pub fn substitute(&self, bindings: &BTreeMap<String, Polynomial>) -> Result<Polynomial, PolyError> {
        let mut by_index: Vec<Option<&Polynomial>> = vec![None; self.env.len()];
        for (name, replacement) in bindings {
            let i = self
                .env
                .index_of(name)
                .ok_or_else(|| PolyError::UnknownVariable(name.clone()))?;
            self.check_env(replacement)?;
            by_index[i] = Some(replacement);
        }
        let mut powers: BTreeMap<(usize, u32), Polynomial> = BTreeMap::new();
        let mut out = Polynomial::zero(&self.env);
        for (m, c) in &self.terms {
            let mut kept = m.exponents().to_vec();
            let mut term = Polynomial::one(&self.env);
            for (i, replacement) in by_index.iter().enumerate() {
                let (Some(r), e) = (replacement, kept[i]) else {
                    continue;
                };
                if e == 0 {
                    continue;
                }
                kept[i] = 0;
                let power = powers.entry((i, e)).or_insert_with(|| r.pow(e));
                term = &term * power;
            }
            let rest = Polynomial::monomial(&self.env, Monomial::from_exponents(kept), *c);
            out = &out + &(&term * &rest);
        }
        Ok(out)
    }

    /// Re-expresses the polynomial over `target`, matching variables by name.
    pub fn reembed(&self, target: &VarEnv) -> Result<Polynomial, PolyError> {
        let mut map = Vec::with_capacity(self.env.len());
        for name in self.env.names() {
            map.push(target.index_of(name));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; target.len()];
            for (i, e) in m.exponents().iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => exps[j] = *e,
                    None => return Err(PolyError::UnknownVariable(self.env.name(i).to_string())),
                }
            }
            terms.push((Monomial::from_exponents(exps), *c));
        }
        Ok(Polynomial::from_terms(target, terms))
    }

    /// Formats with a fixed number of decimals; `None` prints the shortest
    /// representation that parses back to the same coefficients.
    pub fn display_with(&self, precision: Option<usize>) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_sign_negative();
            let mag = c.abs();
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let body = monomial_string(&self.env, m);
            let coeff = match precision {
                Some(p) => format!("{mag:.p$}"),
                None => format!("{mag}"),
            };
            if body.is_empty() {
                out.push_str(&coeff);
            } else if mag == 1.0 {
                out.push_str(&body);
            } else {
                out.push_str(&coeff);
                out.push('*');
                out.push_str(&body);
            }
        }
        out
    }
}

fn monomial_string(env: &VarEnv, m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, e) in m.exponents().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(env.name(i).to_string()),
            _ => parts.push(format!("{}^{}", env.name(i), e)),
        }
    }
    parts.join("*")
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.env == other.env && self.terms == other.terms
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(f.precision()))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({})", self.display_with(None))
    }
}

// Operator forms panic on environment mismatch; the checked methods above
// report it instead.
impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::add(self, rhs).expect("polynomial environments differ")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::sub(self, rhs).expect("polynomial environments differ")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs).expect("polynomial environments differ")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn env(names: &[&str]) -> VarEnv {
        VarEnv::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let e = env(&["x", "y"]);
        let a = parse_poly("x + y", &e).unwrap();
        let b = parse_poly("x - y", &e).unwrap();
        assert_eq!(&a * &b, parse_poly("x^2 - y^2", &e).unwrap());
    }

    #[test]
    fn product_with_zero_is_zero() {
        let e = env(&["x"]);
        let p = parse_poly("3*x^2 + 1", &e).unwrap();
        assert!((&p * &Polynomial::zero(&e)).is_zero());
        assert_eq!(Polynomial::zero(&e).degree(), None);
    }

    #[test]
    fn gram_product_coefficient() {
        // f = a20 x1^2 + a11 x1 x2 + a02 x2^2, g = b00 + b10 x1 + b01 x2
        // with a20 = 1, b00 = 2 and the rest zero.
        let e = env(&["x1", "x2"]);
        let f = parse_poly("1*x1^2 + 0*x1*x2 + 0*x2^2", &e).unwrap();
        let g = parse_poly("2 + 0*x1 + 0*x2", &e).unwrap();
        let fg = &f * &g;
        let x1sq = Monomial::from_exponents(vec![2, 0]);
        assert_eq!(fg.coeff(&x1sq), 2.0);
        assert_eq!(fg.degree(), Some(2));
    }

    #[test]
    fn mismatched_env_is_an_error() {
        let a = Polynomial::one(&env(&["x"]));
        let b = Polynomial::one(&env(&["y"]));
        assert_eq!(a.mul(&b).unwrap_err(), PolyError::EnvMismatch);
    }

    #[test]
    fn substitution_cases() {
        let e = env(&["x", "y", "x'", "y'"]);
        let f1 = parse_poly("x^2 + y - 1 - x'", &e).unwrap();
        let mut b = BTreeMap::new();
        b.insert("x'".to_string(), parse_poly("x^2 + y - 1", &e).unwrap());
        assert!(f1.substitute(&b).unwrap().is_zero());

        let xy = parse_poly("x*y", &e).unwrap();
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), Polynomial::constant(&e, 2.0));
        assert_eq!(xy.substitute(&b).unwrap(), parse_poly("2*y", &e).unwrap());

        let sq = parse_poly("x'^2", &e).unwrap();
        let mut b = BTreeMap::new();
        b.insert("x'".to_string(), parse_poly("x + 1", &e).unwrap());
        assert_eq!(
            sq.substitute(&b).unwrap(),
            parse_poly("x^2 + 2*x + 1", &e).unwrap()
        );

        let mut b = BTreeMap::new();
        b.insert("w".to_string(), Polynomial::one(&e));
        assert!(matches!(sq.substitute(&b), Err(PolyError::UnknownVariable(_))));
    }

    #[test]
    fn evaluation() {
        let e = env(&["x", "y"]);
        let p = parse_poly("x^2 + y", &e).unwrap();
        assert_eq!(p.eval(&[2.0, 1.0]).unwrap(), 5.0);
        assert_eq!(Polynomial::zero(&e).eval(&[0.3, -7.0]).unwrap(), 0.0);
        assert!(matches!(p.eval(&[1.0]), Err(PolyError::DimensionMismatch { .. })));

        let v = env(&["vc"]);
        let line = parse_poly("-1.3983*vc + 69.358", &v).unwrap();
        assert!((line.eval(&[49.0]).unwrap() - 0.8413).abs() < 1e-9);
    }

    #[test]
    fn derivative_and_reembed() {
        let e = env(&["x", "y"]);
        let p = parse_poly("x^3*y + 2*y^2", &e).unwrap();
        assert_eq!(p.derivative(0), parse_poly("3*x^2*y", &e).unwrap());
        let t = env(&["y", "z", "x"]);
        let q = p.reembed(&t).unwrap();
        assert_eq!(q, parse_poly("x^3*y + 2*y^2", &t).unwrap());
        assert!(p.reembed(&env(&["x"])).is_err());
    }

    #[test]
    fn display_round_trips() {
        let e = env(&["x", "y'"]);
        let p = parse_poly("-0.1 + 3*x*y'^2 - x^2 + 1e0*0", &e);
        // scientific notation is not part of the grammar
        assert!(p.is_err());
        let p = parse_poly("-0.1 + 3*x*y'^2 - x^2 + 0.30000000000000004*y'", &e).unwrap();
        let text = p.to_string();
        assert_eq!(parse_poly(&text, &e).unwrap(), p);
        assert_eq!(format!("{:.2}", parse_poly("x - 2.346", &e).unwrap()), "-2.35 + x");
    }
}
