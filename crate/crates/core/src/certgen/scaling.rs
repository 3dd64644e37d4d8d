//! Power-of-two variable scaling `x = s ∘ u` applied before the SDP is built.
//!
//! Inputs such as `49.61 - v` next to `0.0002709*v^2` give constraint rows
//! whose coefficients span many orders of magnitude and stall the interior
//! point method. The scales are the least-squares fit that makes every term
//! of each polynomial the same size; rounding them to powers of two keeps the
//! map back to the original variables exact.

use crate::poly::{Monomial, Polynomial};
use crate::sdp::SymMatrix;

use super::{Certificate, SosPoly};

const MAX_EXPONENT: f64 = 30.0;

/// `log₂` scale per variable; 0 where the data carry no information.
pub(super) fn variable_exponents(polys: &[&Polynomial], nvars: usize) -> Vec<i32> {
    // Per polynomial, centre the term data (removing the free offset), then
    // accumulate normal equations Σ (m − m̄)(m − m̄)ᵀ λ = −Σ (m − m̄)(ℓ − ℓ̄).
    let mut a = vec![vec![0.0; nvars]; nvars];
    let mut rhs = vec![0.0; nvars];
    for p in polys {
        let terms: Vec<(Vec<f64>, f64)> = p
            .terms()
            .filter(|(_, c)| *c != 0.0)
            .map(|(m, c)| (m.exponents().iter().map(|&e| f64::from(e)).collect(), c.abs().log2()))
            .collect();
        if terms.len() < 2 {
            continue;
        }
        let k = terms.len() as f64;
        let mut mbar = vec![0.0; nvars];
        let mut lbar = 0.0;
        for (m, l) in &terms {
            for (acc, e) in mbar.iter_mut().zip(m) {
                *acc += e / k;
            }
            lbar += l / k;
        }
        for (m, l) in &terms {
            let d: Vec<f64> = m.iter().zip(&mbar).map(|(e, b)| e - b).collect();
            for i in 0..nvars {
                for j in 0..nvars {
                    a[i][j] += d[i] * d[j];
                }
                rhs[i] -= d[i] * (l - lbar);
            }
        }
    }
    // a small ridge pins variables the data do not determine at scale 1
    let trace: f64 = (0..nvars).map(|i| a[i][i]).sum();
    let ridge = 1e-6 * trace.max(1.0);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += ridge;
    }
    let lambda = solve(a, rhs).unwrap_or_else(|| vec![0.0; nvars]);
    lambda
        .into_iter()
        .map(|l| l.round().clamp(-MAX_EXPONENT, MAX_EXPONENT) as i32)
        .collect()
}

fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

fn factor(m: &Monomial, exps: &[i32]) -> f64 {
    let e: i32 = m.exponents().iter().zip(exps).map(|(&k, &s)| k as i32 * s).sum();
    2f64.powi(e)
}

/// `p(s ∘ u)` as a polynomial in `u`.
pub(super) fn to_scaled(p: &Polynomial, exps: &[i32]) -> Polynomial {
    Polynomial::from_terms(p.env(), p.terms().map(|(m, c)| (m.clone(), c * factor(m, exps))))
}

/// `p(x / s)`, inverse of [`to_scaled`].
fn from_scaled(p: &Polynomial, exps: &[i32]) -> Polynomial {
    Polynomial::from_terms(p.env(), p.terms().map(|(m, c)| (m.clone(), c / factor(m, exps))))
}

fn sos_from_scaled(s: &SosPoly, exps: &[i32]) -> SosPoly {
    let z = s.basis.monomials();
    let d: Vec<f64> = z.iter().map(|m| factor(m, exps)).collect();
    let n = s.gram.dim();
    let mut gram = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            gram.set(i, j, s.gram.get(i, j) / (d[i] * d[j]));
        }
    }
    SosPoly {
        basis: s.basis.clone(),
        gram,
    }
}

/// Rewrites a certificate found in `u` over the original inputs.
pub(super) fn certificate_from_scaled(
    c: Certificate,
    exps: &[i32],
    fs: &[Polynomial],
    g: &Polynomial,
    hs: &[Polynomial],
) -> Certificate {
    let mut out = Certificate {
        degree: c.degree,
        fs: fs.to_vec(),
        hs: hs.to_vec(),
        p0: sos_from_scaled(&c.p0, exps),
        p: c.p.iter().map(|s| sos_from_scaled(s, exps)).collect(),
        g: g.clone(),
        q: c.q.iter().map(|q| from_scaled(q, exps)).collect(),
        residual: Polynomial::zero(g.env()),
    };
    out.residual = super::residual(&out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, VarEnv};

    #[test]
    fn balanced_data_stay_unscaled() {
        let env = VarEnv::new(["x", "y"]).unwrap();
        let p = parse_poly("1 - x^2 - y^2", &env).unwrap();
        let h = parse_poly("x^2 + y - 1", &env).unwrap();
        assert_eq!(variable_exponents(&[&p, &h], 2), vec![0, 0]);
    }

    #[test]
    fn large_roots_get_large_scales() {
        let env = VarEnv::new(["v", "w"]).unwrap();
        let f = parse_poly("49.61 - v", &env).unwrap();
        let h = parse_poly("w - v - 0.5 + 0.0002709*v^2", &env).unwrap();
        let e = variable_exponents(&[&f, &h], 2);
        assert!((5..=7).contains(&e[0]), "{e:?}");
        let s = to_scaled(&f, &e);
        assert_eq!(from_scaled(&s, &e), f);
    }
}
