use std::collections::BTreeMap;

use proptest::prelude::*;
use psatz::certgen::{build_identity_template, certificate_generation, extract_sos, CertConfig, SosPoly};
use psatz::poly::{monomial_basis, Monomial, Polynomial, VarEnv};
use psatz::sdp::{min_eigenvalue, BlockMatrix, SymMatrix};

fn env(n: usize) -> VarEnv {
    VarEnv::new((0..n).map(|i| format!("v{i}"))).unwrap()
}

fn random_poly(env: &VarEnv, max_deg: u32, raw: &[(Vec<u32>, f64)]) -> Polynomial {
    let n = env.len();
    let terms = raw.iter().filter_map(|(e, c)| {
        let e: Vec<u32> = e.iter().take(n).copied().collect();
        (e.iter().sum::<u32>() <= max_deg).then(|| (Monomial::from_exponents(e), *c))
    });
    Polynomial::from_terms(env, terms)
}

// B Bᵀ from a flat list of entries; `rank` columns.
fn gram_from(n: usize, rank: usize, flat: &[f64]) -> SymMatrix {
    let b = |i: usize, k: usize| flat[(i * rank + k) % flat.len()];
    let mut q = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            q.set(i, j, (0..rank).map(|k| b(i, k) * b(j, k)).sum());
        }
    }
    q
}

// Oracle: the full double sum Σ_{a,b} Q_ab z_a z_b, without symmetry folding.
fn expand_gram(z: &[Monomial], q: &SymMatrix) -> BTreeMap<Monomial, f64> {
    let mut out = BTreeMap::new();
    for a in 0..z.len() {
        for b in 0..z.len() {
            *out.entry(z[a].mul(&z[b])).or_insert(0.0) += q.get(a, b);
        }
    }
    out
}

fn times(f: &Polynomial, g: &BTreeMap<Monomial, f64>) -> BTreeMap<Monomial, f64> {
    let mut out = BTreeMap::new();
    for (m, c) in f.terms() {
        for (k, v) in g {
            *out.entry(m.mul(k)).or_insert(0.0) += c * v;
        }
    }
    out
}

fn raw_terms() -> impl Strategy<Value = Vec<(Vec<u32>, f64)>> {
    prop::collection::vec((prop::collection::vec(0u32..=3, 3), -3.0f64..3.0), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn template_rows_match_symbolic_expansion(
        n in 1usize..=3,
        d in 0u32..=2,
        raw in raw_terms(),
        rank in 1usize..=4,
        flat in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let env = env(n);
        let f = random_poly(&env, 3, &raw);
        let t = build_identity_template(&[f.clone()], &Polynomial::zero(&env), &[], 2 * d).unwrap();
        let z = t.basis.monomials();
        let q = gram_from(z.len(), rank, &flat);
        let x = BlockMatrix::new(vec![SymMatrix::zeros(z.len()), q.clone()]);

        // With p0 = 0 each row evaluates to the coefficient of f·ZᵀQZ.
        let expected = times(&f, &expand_gram(z, &q));
        let scale = expected.values().fold(1.0f64, |m, v| m.max(v.abs()));
        for (row, m) in t.problem.a.iter().zip(&t.monomials) {
            let got = row.inner_dense(&x);
            let want = expected.get(m).copied().unwrap_or(0.0);
            prop_assert!((got - want).abs() <= 1e-12 * scale, "{m:?}: {got} vs {want}");
        }
        for (m, v) in &expected {
            if t.constraint_index(m).is_none() {
                prop_assert!(v.abs() <= 1e-12 * scale, "monomial {m:?} missing from rows");
            }
        }
    }

    #[test]
    fn extract_sos_round_trips(
        shape in prop::sample::select(vec![(1usize, 14u32), (1, 5), (2, 3), (2, 1), (3, 2), (4, 2), (4, 1)]),
        rank_frac in 0.0f64..=1.0,
        flat in prop::collection::vec(-2.0f64..2.0, 1..240),
    ) {
        let (n, d) = shape;
        let env = env(n);
        let basis = monomial_basis(&env, d);
        let dim = basis.len();
        prop_assume!(dim <= 15);
        let rank = ((rank_frac * dim as f64).round() as usize).max(1);
        let gram = gram_from(dim, rank, &flat);
        let s = SosPoly { basis, gram };
        let original = s.to_polynomial();
        let squares = extract_sos(&s, 1e-12).unwrap();
        let rebuilt = squares
            .iter()
            .fold(Polynomial::zero(&env), |acc, (w, l)| &acc + &(&(l * l) * &Polynomial::constant(&env, *w)));
        let diff = &rebuilt - &original;
        let scale = original.max_abs_coeff().max(1.0);
        prop_assert!(diff.max_abs_coeff() <= 1e-8 * scale, "off by {}", diff.max_abs_coeff());
        prop_assert!(squares.iter().all(|(w, _)| *w > 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // {x ≥ a, x ≤ c} with a > c has a certificate; whatever is accepted must
    // satisfy the identity and PSD bounds.
    #[test]
    fn accepted_certificates_meet_their_bounds(a in -2.0f64..2.0, gap in 0.1f64..2.0, b in prop::sample::select(vec![0u32, 2])) {
        let env = env(1);
        let x = Polynomial::var_at(&env, 0);
        let fs = [x.add_constant(-a), (&x * &Polynomial::constant(&env, -1.0)).add_constant(a - gap)];
        let cfg = CertConfig::default();
        let cert = certificate_generation(&fs, &Polynomial::zero(&env), &[], b, &cfg).unwrap();
        let cert = cert.expect("interval pair is refutable at degree 0");
        let scale = cert.scale();
        prop_assert!(cert.residual.max_abs_coeff() <= cfg.accept_tol * scale);
        for s in cert.grams() {
            prop_assert!(min_eigenvalue(&s.gram).unwrap() >= -cfg.accept_tol * scale);
        }
    }
}
