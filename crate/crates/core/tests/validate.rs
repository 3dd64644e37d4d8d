use std::collections::BTreeMap;

use proptest::prelude::*;
use psatz::certgen::{certificate_generation, CertConfig};
use psatz::interp::{sn_interpolants, InterpConfig};
use psatz::poly::{parse_poly, Polynomial, VarEnv};
use psatz::sas::{DefEquations, Sas};
use psatz::validate::{
    check_certificate, check_polynomial, check_separation, resolve_box, resolve_side_boxes, sample_sas, Side, ValidateError,
    ValidationConfig, Verdict,
};

fn sas(env: &VarEnv, geqs: &[&str], neqs: &[&str], eqs: &[&str]) -> Sas {
    let p = |v: &[&str]| v.iter().map(|s| parse_poly(s, env).unwrap()).collect();
    Sas::new(env, p(geqs), p(neqs), p(eqs)).unwrap()
}

fn hand_pair() -> (VarEnv, Sas, Sas) {
    let env = VarEnv::new(["x"]).unwrap();
    let t1 = sas(&env, &["x"], &[], &[]);
    let t2 = sas(&env, &["-x - 1"], &[], &[]);
    (env, t1, t2)
}

#[test]
fn certificate_check_detects_corruption() {
    let (env, t1, t2) = hand_pair();
    let fs = [t1.geqs[0].clone(), t2.geqs[0].clone()];
    let mut cert = certificate_generation(&fs, &Polynomial::zero(&env), &[], 0, &CertConfig::default())
        .unwrap()
        .unwrap();
    let ok = check_certificate(&cert, 1e-6);
    assert!(ok.pass && ok.residual_norm < 1e-6 && ok.worst_gram_eig > -1e-9, "{ok:?}");
    let v = cert.p[0].gram.get(0, 0);
    cert.p[0].gram.set(0, 0, v + 1.0);
    let bad = check_certificate(&cert, 1e-6);
    assert!(!bad.pass);
    assert!((bad.residual_norm - 1.0).abs() < 1e-6);
}

#[test]
fn half_box_acceptance() {
    let env = VarEnv::new(["x"]).unwrap();
    let t = sas(&env, &["x"], &[], &[]);
    let s = sample_sas(&t, 20_000, 7, &vec![(-1.0, 1.0)], 1e-6).unwrap();
    assert!((s.acceptance_ratio() - 0.5).abs() < 0.02, "{}", s.acceptance_ratio());
    assert!(s.points.iter().all(|a| a[0] >= 0.0));
}

#[test]
fn equation_band_is_respected() {
    let env = VarEnv::new(["x", "y"]).unwrap();
    let t = sas(&env, &[], &[], &["x - y"]);
    let s = sample_sas(&t, 2000, 1, &vec![(-1.0, 1.0); 2], 1e-3).unwrap();
    assert!(s.acceptance_ratio() > 0.9, "{}", s.acceptance_ratio());
    assert!(s.points.iter().all(|a| (a[0] - a[1]).abs() <= 1e-3));
    // sub-band projection onto a curve
    let t = sas(&env, &[], &[], &["x^2 + y - 1"]);
    let s = sample_sas(&t, 2000, 1, &vec![(-3.0, 3.0); 2], 1e-6).unwrap();
    assert!(s.acceptance_ratio() > 0.3);
    assert!(s.points.iter().all(|a| (a[0] * a[0] + a[1] - 1.0).abs() <= 1e-6));
}

#[test]
fn box_from_bounds_or_explicit() {
    let env = VarEnv::new(["x1", "x2", "x3"]).unwrap();
    let psi = ["x1 + 2", "2 - x1", "x2 + 2", "2 - x2", "x3 + 2", "2 - x3"];
    let mut g1 = psi.to_vec();
    g1.extend(["-x1^2 - 4*x2^2 - x3^2 + 2", "x1^2 - x2^2 - x1*x3 - 1"]);
    let mut g2 = psi.to_vec();
    g2.extend(["-x1^2 - 4*x2^2 - x3^2 + 3*x1*x2 + 0.2", "-x1^2 + x2^2 + x1*x3 + 1"]);
    let (t1, t2) = (sas(&env, &g1, &[], &[]), sas(&env, &g2, &[], &[]));
    let bx = resolve_box(&env, &BTreeMap::new(), &[&t1, &t2]).unwrap();
    assert_eq!(bx, vec![(-2.0, 2.0); 3]);
    for t in [&t1, &t2] {
        assert!(sample_sas(t, 10_000, 42, &bx, 1e-6).unwrap().acceptance_ratio() > 0.0);
    }

    let free = sas(&env, &["x1"], &[], &[]);
    assert_eq!(
        resolve_box(&env, &BTreeMap::new(), &[&free]),
        Err(ValidateError::MissingBox("x1".into()))
    );
    let explicit: BTreeMap<String, (f64, f64)> =
        ["x1", "x2", "x3"].iter().map(|v| (v.to_string(), (-1.0, 3.0))).collect();
    let bx = resolve_box(&env, &explicit, &[&t1]).unwrap();
    assert_eq!(bx[0], (-1.0, 2.0));
}

#[test]
fn separated_bounds_give_one_box_per_side() {
    let env = VarEnv::new(["x", "y"]).unwrap();
    let t1 = sas(&env, &["x - 2", "5 - x"], &[], &[]);
    let t2 = sas(&env, &["x", "1 - x", "y + 1", "1 - y"], &[], &[]);
    assert!(resolve_box(&env, &BTreeMap::new(), &[&t1, &t2]).is_err());
    let explicit: BTreeMap<String, (f64, f64)> = [("x".to_string(), (-10.0, 4.0))].into();
    let (b1, b2) = resolve_side_boxes(&env, &explicit, &t1, &t2).unwrap();
    assert_eq!(b1, vec![(2.0, 4.0), (-1.0, 1.0)]);
    assert_eq!(b2, vec![(0.0, 1.0), (-1.0, 1.0)]);
    let q = parse_poly("x - 1.5", &env).unwrap();
    let cfg = ValidationConfig { samples: 2000, ..ValidationConfig::default() };
    let r = psatz::validate::check_polynomial_split(&q, None, &t1, &t2, (&b1, &b2), &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r}");
}

#[test]
fn hand_interpolant_passes_with_half_margin() {
    let (env, t1, t2) = hand_pair();
    let q = parse_poly("0.5 + x", &env).unwrap();
    let bx = vec![(-3.0, 3.0)];
    let r = check_polynomial(&q, None, &t1, &t2, &bx, &ValidationConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.t1_min.unwrap() >= 0.5 && r.t2_max.unwrap() <= -0.5);
    assert!(r.margin().unwrap() >= 0.5);
    assert_eq!(r.residual_norm, None);

    let neg = -&q;
    let r = check_polynomial(&neg, None, &t1, &t2, &bx, &ValidationConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let c = r.counterexample.unwrap();
    assert_eq!(c.side, Side::T1);
    assert!(c.value <= 0.0 && neg.eval(&c.point).unwrap() == c.value);
}

#[test]
fn small_margin_is_a_warning_and_empty_side_too() {
    let (env, t1, t2) = hand_pair();
    let q = parse_poly("0.05*x + 0.01", &env).unwrap();
    let bx = vec![(-3.0, 3.0)];
    let r = check_polynomial(&q, None, &t1, &t2, &bx, &ValidationConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::MarginWarning);
    let r = check_polynomial(&q, None, &t1, &t2, &vec![(0.0, 3.0)], &ValidationConfig::default()).unwrap();
    assert_eq!((r.t2_samples, r.verdict), (0, Verdict::MarginWarning));
    assert!(r.notes.iter().any(|n| n.contains("no T2 samples")));
}

#[test]
fn published_logistic_values() {
    let env = VarEnv::new(["x"]).unwrap();
    let q = parse_poly("108.92 - 214.56*x", &env).unwrap();
    assert!((q.eval(&[0.50]).unwrap() - 1.64).abs() < 1e-9);
    assert!((q.eval(&[0.52]).unwrap() + 2.6512).abs() < 1e-9);
    let q = parse_poly("-1.3983*x + 69.358", &env).unwrap();
    assert!((q.eval(&[49.61]).unwrap() + 0.011663).abs() < 1e-6);
}

#[test]
fn reports_are_deterministic() {
    let env = VarEnv::new(["x", "y"]).unwrap();
    let t1 = sas(&env, &["1 - x^2 - y^2"], &[], &["x - y^2"]);
    let t2 = sas(&env, &["x - 2"], &[], &[]);
    let q = parse_poly("1.5 - x", &env).unwrap();
    let bx = vec![(-3.0, 3.0); 2];
    let cfg = ValidationConfig {
        samples: 3000,
        ..ValidationConfig::default()
    };
    let a = check_polynomial(&q, None, &t1, &t2, &bx, &cfg).unwrap();
    let b = check_polynomial(&q, None, &t1, &t2, &bx, &cfg).unwrap();
    assert_eq!(a, b);
    let c = check_polynomial(&q, None, &t1, &t2, &bx, &ValidationConfig { seed: 7, ..cfg }).unwrap();
    assert_ne!(a.t1_min, c.t1_min);
}

#[test]
fn running_example_first_system_is_sampled() {
    let env = VarEnv::new(["x", "y", "x'", "y'"]).unwrap();
    let t1 = sas(
        &env,
        &["1 - x^2 - y^2"],
        &["1 - x^2 - y^2"],
        &["x^2 + y - 1 - x'", "y + x'*y + 1 - y'"],
    );
    let s = sample_sas(&t1, 10_000, 42, &vec![(-3.0, 3.0); 4], 1e-6).unwrap();
    assert!(s.acceptance_ratio() > 0.05, "{}", s.acceptance_ratio());
    for a in &s.points {
        assert!(t1.eqs.iter().all(|h| h.eval(a).unwrap().abs() <= 1e-6));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Inequality-only systems with an accepted certificate never Fail, and
    // the certificate re-check agrees with synthesis.
    #[test]
    fn accepted_interpolants_never_fail(lo in -2.0f64..2.0, w in 0.2f64..1.5, gap in 0.3f64..1.5, seed in 0u64..1000) {
        let env = VarEnv::new(["x"]).unwrap();
        let x = Polynomial::var_at(&env, 0);
        let t1 = Sas::new(&env, vec![x.add_constant(-lo), (-&x).add_constant(lo + w)], vec![], vec![]).unwrap();
        let c = lo + w + gap;
        let t2 = Sas::new(&env, vec![x.add_constant(-c), (-&x).add_constant(c + w)], vec![], vec![]).unwrap();
        let i = sn_interpolants(&t1, &t2, &DefEquations::empty(), 2, &InterpConfig::default()).unwrap().unwrap();
        prop_assert!(check_certificate(&i.certificate, 1e-6).pass);
        let cfg = ValidationConfig { samples: 2000, seed, ..ValidationConfig::default() };
        let r = check_separation(&i, &t1, &t2, &vec![(-5.0, 6.0)], &cfg).unwrap();
        prop_assert!(r.verdict != Verdict::Fail, "{r}");
        prop_assert_eq!(r.bound_violations, 0);
    }
}
