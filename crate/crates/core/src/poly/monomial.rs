use std::cmp::Ordering;

/// Exponent vector over a [`VarEnv`](super::VarEnv).
///
/// Ordering is graded lexicographic: lower total degree first, then within a
/// degree the monomial with the larger leading exponent comes first, so the
/// degree-one monomials sort as `x1, x2, ..., xn`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    degree: u32,
    exps: Box<[u32]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self {
            degree: 0,
            exps: vec![0; nvars].into_boxed_slice(),
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Self {
            degree: 1,
            exps: exps.into_boxed_slice(),
        }
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        let degree = exps.iter().sum();
        Self {
            degree,
            exps: exps.into_boxed_slice(),
        }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        let exps: Vec<u32> = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| a + b)
            .collect();
        Monomial {
            degree: self.degree + other.degree,
            exps: exps.into_boxed_slice(),
        }
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(point)
            .filter(|(e, _)| **e > 0)
            .map(|(e, x)| x.powi(*e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let m = |e: &[u32]| Monomial::from_exponents(e.to_vec());
        let mut v = vec![m(&[0, 2]), m(&[1, 0]), m(&[0, 0]), m(&[1, 1]), m(&[2, 0]), m(&[0, 1])];
        v.sort();
        assert_eq!(
            v,
            vec![m(&[0, 0]), m(&[1, 0]), m(&[0, 1]), m(&[2, 0]), m(&[1, 1]), m(&[0, 2])]
        );
    }
}
