use std::collections::BTreeMap;

use super::{residual, CertError, Certificate, SosPoly};
use crate::poly::{monomial_basis, GramBasis, Monomial, PolyError, Polynomial};
use crate::sdp::{BlockMatrix, Entry, SdpProblem, SparseBlockMatrix};

/// What an SDP block stands for in the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockRole {
    /// The free SOS term `p0`.
    Constant,
    /// Multiplier `pᵢ` of generator `i`.
    Generator(usize),
    /// `qᵢ₁` of equation `i` (enters with `+hᵢ`).
    EqPlus(usize),
    /// `qᵢ₂` of equation `i` (enters with `−hᵢ`).
    EqMinus(usize),
}

/// The SDP encoding of one identity search together with the bookkeeping
/// needed to map a solution back to multipliers.
#[derive(Clone, Debug)]
pub struct Template {
    pub degree: u32,
    pub problem: SdpProblem,
    /// Shared Gram basis of every block.
    pub basis: GramBasis,
    pub roles: Vec<BlockRole>,
    /// Monomial of each constraint row, in graded-lex order.
    pub monomials: Vec<Monomial>,
}

pub fn build_identity_template(
    fs: &[Polynomial],
    g: &Polynomial,
    hs: &[Polynomial],
    b: u32,
) -> Result<Template, CertError> {
    if b % 2 != 0 {
        return Err(CertError::OddDegree(b));
    }
    let env = g.env();
    if fs.iter().chain(hs).any(|p| p.env() != env) {
        return Err(PolyError::EnvMismatch.into());
    }
    let basis = monomial_basis(env, b / 2);
    let z = basis.monomials();

    let one = Polynomial::one(env);
    let mut blocks: Vec<(BlockRole, &Polynomial, f64)> = vec![(BlockRole::Constant, &one, 1.0)];
    blocks.extend(fs.iter().enumerate().map(|(i, f)| (BlockRole::Generator(i), f, 1.0)));
    for (i, h) in hs.iter().enumerate() {
        blocks.push((BlockRole::EqPlus(i), h, 1.0));
        blocks.push((BlockRole::EqMinus(i), h, -1.0));
    }

    // Off-diagonal entries stand for both (a, b) and (b, a), contributing
    // 2·Q_ab·z_a·z_b·t, which is exactly the expansion coefficient.
    let mut rows: BTreeMap<Monomial, Vec<Entry>> = BTreeMap::new();
    for (block, (_, t, sign)) in blocks.iter().enumerate() {
        for a in 0..z.len() {
            for bb in a..z.len() {
                let zab = z[a].mul(&z[bb]);
                for (tm, c) in t.terms() {
                    rows.entry(zab.mul(tm)).or_default().push(Entry {
                        block,
                        i: a,
                        j: bb,
                        value: sign * c,
                    });
                }
            }
        }
    }
    let known = g.add_constant(1.0);
    for (m, _) in known.terms() {
        rows.entry(m.clone()).or_default();
    }

    let mut monomials = Vec::with_capacity(rows.len());
    let mut a = Vec::with_capacity(rows.len());
    let mut rhs = Vec::with_capacity(rows.len());
    for (m, entries) in rows {
        rhs.push(-known.coeff(&m));
        a.push(SparseBlockMatrix::new(entries));
        monomials.push(m);
    }
    let dims = vec![z.len(); blocks.len()];
    let problem = SdpProblem::new(dims, SparseBlockMatrix::zero(), a, rhs)?;
    Ok(Template {
        degree: b,
        problem,
        basis,
        roles: blocks.iter().map(|(r, _, _)| *r).collect(),
        monomials,
    })
}

impl Template {
    pub fn constraint_index(&self, m: &Monomial) -> Option<usize> {
        self.monomials.binary_search(m).ok()
    }

    /// Reads Gram blocks from `x` and recomputes the residual symbolically.
    pub fn certificate_from(
        &self,
        x: &BlockMatrix,
        fs: &[Polynomial],
        g: &Polynomial,
        hs: &[Polynomial],
    ) -> Certificate {
        let sos = |k: usize| SosPoly {
            basis: self.basis.clone(),
            gram: x.block(k).clone(),
        };
        let mut p0 = None;
        let mut p = Vec::with_capacity(fs.len());
        let mut q_plus = vec![None; hs.len()];
        let mut q = vec![Polynomial::zero(g.env()); hs.len()];
        for (k, role) in self.roles.iter().enumerate() {
            match *role {
                BlockRole::Constant => p0 = Some(sos(k)),
                BlockRole::Generator(_) => p.push(sos(k)),
                BlockRole::EqPlus(i) => q_plus[i] = Some(sos(k).to_polynomial()),
                BlockRole::EqMinus(i) => {
                    let plus = q_plus[i].take().expect("plus block precedes minus block");
                    q[i] = &plus - &sos(k).to_polynomial();
                }
            }
        }
        let mut cert = Certificate {
            degree: self.degree,
            fs: fs.to_vec(),
            hs: hs.to_vec(),
            p0: p0.expect("constant block"),
            p,
            g: g.clone(),
            q,
            residual: Polynomial::zero(g.env()),
        };
        cert.residual = residual(&cert);
        cert
    }
}
