use psatz::certgen::{certificate_generation, certificate_generation_detailed, CertConfig};
use psatz::poly::{parse_poly, Polynomial, VarEnv};

fn polys(env: &VarEnv, src: &[&str]) -> Vec<Polynomial> {
    src.iter().map(|s| parse_poly(s, env).unwrap()).collect()
}

#[test]
fn linear_pair_at_degree_zero() {
    let env = VarEnv::new(["x"]).unwrap();
    let fs = polys(&env, &["x", "-x - 1"]);
    let cert = certificate_generation(&fs, &Polynomial::zero(&env), &[], 0, &CertConfig::default())
        .unwrap()
        .expect("hand identity 1 + x + (-x - 1) = 0 exists");
    assert!(cert.residual.max_abs_coeff() <= 1e-6 * cert.scale());
    let p1 = cert.p[0].gram.get(0, 0);
    let p2 = cert.p[1].gram.get(0, 0);
    assert!((p1 - 1.0).abs() < 1e-5 && (p2 - 1.0).abs() < 1e-5, "{p1} {p2}");
}

#[test]
fn minus_one_generator() {
    let env = VarEnv::new(["x"]).unwrap();
    let fs = polys(&env, &["-1"]);
    let cert = certificate_generation(&fs, &Polynomial::zero(&env), &[], 0, &CertConfig::default())
        .unwrap()
        .expect("1 + 0 + 1*(-1) = 0");
    assert!(cert.residual.max_abs_coeff() < 1e-6);
}

#[test]
fn quadratic_module_without_products_has_no_certificate() {
    let env = VarEnv::new(["x1", "x2"]).unwrap();
    let fs = polys(&env, &["x1", "x2", "-x1*x2 - 1"]);
    for b in [2, 4, 6] {
        let out = certificate_generation_detailed(&fs, &Polynomial::zero(&env), &[], b, &CertConfig::default()).unwrap();
        assert!(out.certificate.is_none(), "b = {b}");
    }
}

#[test]
fn running_example_degree_four() {
    let env = VarEnv::new(["x", "y", "x'", "y'"]).unwrap();
    let fs = polys(&env, &["1 - x^2 - y^2", "x'^2 - 2*y'^2 - 4"]);
    let hs = polys(&env, &["x^2 + y - 1 - x'", "y + x'*y + 1 - y'"]);
    let out = certificate_generation_detailed(&fs, &Polynomial::one(&env), &hs, 4, &CertConfig::default()).unwrap();
    let cert = out.certificate.expect("certificate at b = 4");
    assert!(cert.residual.max_abs_coeff() <= 1e-6 * cert.scale());
}
