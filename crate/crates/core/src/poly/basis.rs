use super::{Monomial, VarEnv};

/// All monomials of total degree at most `degree`, in graded-lex order.
#[derive(Clone, Debug, PartialEq)]
pub struct GramBasis {
    env: VarEnv,
    degree: u32,
    monomials: Vec<Monomial>,
}

impl GramBasis {
    pub fn env(&self) -> &VarEnv {
        &self.env
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

pub fn monomial_basis(env: &VarEnv, degree: u32) -> GramBasis {
    let n = env.len();
    let mut monomials = Vec::with_capacity(binomial(n as u64 + degree as u64, n as u64) as usize);
    let mut buf = vec![0u32; n];
    for d in 0..=degree {
        if n == 0 {
            if d == 0 {
                monomials.push(Monomial::one(0));
            }
            continue;
        }
        compositions(d, 0, &mut buf, &mut monomials);
    }
    GramBasis {
        env: env.clone(),
        degree,
        monomials,
    }
}

// Exponent tuples summing to `remaining` over positions `pos..`, leading
// exponent descending so the output is already in graded-lex order.
fn compositions(remaining: u32, pos: usize, buf: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    let n = buf.len();
    if pos == n - 1 {
        buf[pos] = remaining;
        out.push(Monomial::from_exponents(buf.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        buf[pos] = e;
        compositions(remaining - e, pos + 1, buf, out);
    }
    buf[pos] = 0;
}

/// Binomial coefficient with exact integer arithmetic.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
