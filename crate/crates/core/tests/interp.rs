use proptest::prelude::*;
use psatz::interp::{
    combine_interpolants, rsn_interpolants, sn_interpolants, sn_interpolants_escalating, InterpConfig, InterpError,
    Interpolant, Mode,
};
use psatz::poly::{parse_poly, Polynomial, VarEnv};
use psatz::sas::{DefEquations, Sas};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sas(env: &VarEnv, geqs: &[&str], neqs: &[&str], eqs: &[&str]) -> Sas {
    let p = |v: &[&str]| v.iter().map(|s| parse_poly(s, env).unwrap()).collect();
    Sas::new(env, p(geqs), p(neqs), p(eqs)).unwrap()
}

fn none() -> DefEquations {
    DefEquations::empty()
}

// The residual bound each side must respect: q ≥ 1/2 − |r| on T1 points,
// q ≤ −1/2 + |r| on T2 points (exact points, so no equation slack).
fn assert_separates(i: &Interpolant, t1_points: &[Vec<f64>], t2_points: &[Vec<f64>]) {
    let r = &i.certificate.residual;
    for a in t1_points {
        let (q, res) = (i.q.eval(a).unwrap(), r.eval(a).unwrap().abs());
        assert!(q >= 0.5 - res - 1e-9, "T1 point {a:?}: q = {q}");
    }
    for a in t2_points {
        let (q, res) = (i.q.eval(a).unwrap(), r.eval(a).unwrap().abs());
        assert!(q <= -0.5 + res + 1e-9, "T2 point {a:?}: q = {q}");
    }
}

fn box_points(t: &Sas, n: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = t.env().len();
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(lo..=hi)).collect::<Vec<f64>>())
        .filter(|a| t.holds_at(a).unwrap())
        .collect()
}

#[test]
fn hand_pair_at_degree_zero() {
    let env = VarEnv::new(["x"]).unwrap();
    let t1 = sas(&env, &["x"], &[], &[]);
    let t2 = sas(&env, &["-x - 1"], &[], &[]);
    let i = sn_interpolants(&t1, &t2, &none(), 0, &InterpConfig::default())
        .unwrap()
        .expect("1 + x + (-x - 1) = 0");
    assert_eq!((i.mode, i.degree_bound), (Mode::General, 0));
    // g = 1 here, so q = 1/2 + p1·x + 1 with p1 ≈ 1
    let pts = |v: &[f64]| v.iter().map(|&x| vec![x]).collect::<Vec<_>>();
    assert_separates(&i, &pts(&[0.0, 0.3, 1.0, 7.0]), &pts(&[-1.0, -1.5, -4.0]));
}

fn varieties() -> (VarEnv, Sas, Sas) {
    let env = VarEnv::new(["x1", "x2", "x3"]).unwrap();
    let t1 = sas(
        &env,
        &["x1^2 + x2^2 + x3^2 - 2"],
        &["x1 + x2 + x3"],
        &["1.2*x1^2 + x2^2 + x1*x3"],
    );
    let t2 = sas(
        &env,
        &["-3*x1^2 - 4*x2^3 - 10*x3^2 + 20"],
        &["2*x1 + 3*x2 - 4*x3"],
        &["x1^2 + x2^2 - x3 - 1"],
    );
    (env, t1, t2)
}

// Both varieties are graphs over (x1, x2), so exact points are easy to draw.
fn varieties_points(t: &Sas, solve_x3: impl Fn(f64, f64) -> Option<f64>, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..4000 {
        let (x1, x2) = (rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0));
        if let Some(x3) = solve_x3(x1, x2) {
            let a = vec![x1, x2, x3];
            let ok = t.geqs.iter().all(|f| f.eval(&a).unwrap() >= 0.0)
                && t.neqs.iter().all(|f| f.eval(&a).unwrap() != 0.0)
                && x3.abs() <= 3.0;
            if ok {
                out.push(a);
            }
        }
    }
    out
}

// At b = 2 (with g = 1) the program is infeasible: an external conic solver
// returns a Farkas ray, forcing trace(X) ≥ 2.5e9 for any solution. The first
// separating certificate appears at b = 4.
#[test]
fn varieties_separated_by_escalation() {
    let (_, t1, t2) = varieties();
    let cfg = InterpConfig::default();
    assert!(sn_interpolants(&t1, &t2, &none(), 2, &cfg).unwrap().is_none());
    let i = sn_interpolants_escalating(&t1, &t2, &none(), &cfg)
        .unwrap()
        .expect("interpolant by b = 8");
    assert_eq!(i.degree_bound, 4);
    let p1 = varieties_points(&t1, |x1, x2| (x1.abs() > 1e-3).then(|| -(1.2 * x1 * x1 + x2 * x2) / x1), 1);
    let p2 = varieties_points(&t2, |x1, x2| Some(x1 * x1 + x2 * x2 - 1.0), 2);
    assert!(p1.len() > 50 && p2.len() > 50, "{} {}", p1.len(), p2.len());
    assert_separates(&i, &p1, &p2);
}

fn boxed_quadrics() -> (VarEnv, Sas, Sas) {
    let env = VarEnv::new(["x1", "x2", "x3"]).unwrap();
    let psi = ["x1 + 2", "2 - x1", "x2 + 2", "2 - x2", "x3 + 2", "2 - x3"];
    let with_psi = |extra: [&'static str; 2]| {
        let mut g: Vec<&str> = psi.to_vec();
        g.extend(extra);
        sas(&env, &g, &[], &[])
    };
    let t1 = with_psi(["-x1^2 - 4*x2^2 - x3^2 + 2", "x1^2 - x2^2 - x1*x3 - 1"]);
    let t2 = with_psi(["-x1^2 - 4*x2^2 - x3^2 + 3*x1*x2 + 0.2", "-x1^2 + x2^2 + x1*x3 + 1"]);
    (env, t1, t2)
}

#[test]
fn boxed_quadrics_final_degree_two() {
    let (_, t1, t2) = boxed_quadrics();
    let i = rsn_interpolants(&t1, &t2, &none(), 8, &InterpConfig::default())
        .unwrap()
        .expect("interpolant in the quadratic module");
    assert_eq!((i.mode, i.degree_bound), (Mode::Archimedean, 2));
    let p1 = box_points(&t1, 40_000, -2.0, 2.0, 3);
    let p2 = box_points(&t2, 40_000, -2.0, 2.0, 4);
    assert!(!p1.is_empty() && !p2.is_empty());
    assert_separates(&i, &p1, &p2);
}

#[test]
fn interval_pair_in_archimedean_mode() {
    let env = VarEnv::new(["x"]).unwrap();
    let t1 = sas(&env, &["x", "2 - x"], &[], &[]);
    let t2 = sas(&env, &["-x - 1", "x + 2"], &[], &[]);
    let i = rsn_interpolants(&t1, &t2, &none(), 4, &InterpConfig::default())
        .unwrap()
        .expect("separated at 0 / -1");
    assert!(i.degree_bound <= 4);
    let grid = |lo: f64, hi: f64| (0..=50).map(|k| vec![lo + (hi - lo) * k as f64 / 50.0]).collect::<Vec<_>>();
    assert_separates(&i, &grid(0.0, 2.0), &grid(-2.0, -1.0));
}

#[test]
fn unbounded_inputs_rejected_by_archimedean_mode() {
    let env = VarEnv::new(["x", "y"]).unwrap();
    let t1 = sas(&env, &["x", "2 - x"], &[], &[]);
    let t2 = sas(&env, &["-x - 1", "y"], &[], &[]);
    let err = rsn_interpolants(&t1, &t2, &none(), 4, &InterpConfig::default()).unwrap_err();
    assert_eq!(err, InterpError::NotArchimedean(vec!["y".into()]));
    let t2 = sas(&env, &["-x - 1", "x + 2", "y + 1", "1 - y"], &["y"], &[]);
    assert!(matches!(
        rsn_interpolants(&t1, &t2, &none(), 4, &InterpConfig::default()),
        Err(InterpError::HasDisequations(1))
    ));
}

// {x1 ≥ 0, x2 ≥ 0} against {x1·x2 ≤ −1} has no quadratic-module refutation,
// but x1·x2 is a cone generator, so the general track separates the pair.
#[test]
fn cone_products_separate_the_product_pair() {
    let env = VarEnv::new(["x1", "x2"]).unwrap();
    let t1 = sas(&env, &["x1", "x2"], &[], &[]);
    let t2 = sas(&env, &["-x1*x2 - 1"], &[], &[]);
    let i = sn_interpolants(&t1, &t2, &none(), 2, &InterpConfig::default())
        .unwrap()
        .expect("1 + x1·x2 + (−x1·x2 − 1) = 0 is in the cone");
    let p1 = box_points(&t1, 5000, -3.0, 3.0, 5);
    let p2 = box_points(&t2, 5000, -3.0, 3.0, 6);
    assert_separates(&i, &p1, &p2);
}

#[test]
fn escalation_stops_at_first_success() {
    let env = VarEnv::new(["x"]).unwrap();
    let t1 = sas(&env, &["x"], &[], &[]);
    let t2 = sas(&env, &["-x - 1"], &[], &[]);
    let cfg = InterpConfig {
        start_degree: 0,
        ..InterpConfig::default()
    };
    let i = sn_interpolants_escalating(&t1, &t2, &none(), &cfg).unwrap().unwrap();
    assert_eq!(i.degree_bound, 0);
}

#[test]
fn definitions_are_substituted_first() {
    let env = VarEnv::new(["x", "y"]).unwrap();
    let t1 = sas(&env, &["x"], &[], &[]);
    let t2 = sas(&env, &["-y - 1"], &[], &[]);
    let defs = DefEquations::new([("y".to_string(), parse_poly("x", &env).unwrap())].into()).unwrap();
    let i = sn_interpolants(&t1, &t2, &defs, 0, &InterpConfig::default()).unwrap().unwrap();
    assert_eq!(i.q.env().names(), ["x".to_string()]);
}

#[test]
fn two_by_two_combination() {
    let env = VarEnv::new(["x"]).unwrap();
    let t = |g: &str| sas(&env, &[g], &[], &[]);
    let cfg = InterpConfig::default();
    let solve = |a: &Sas, b: &Sas| sn_interpolants(a, b, &none(), 0, &cfg).unwrap();
    // Rows: x ≥ 2 and x ≤ −2; each cell is separated from one side of [−1, 1].
    let (a1, a2) = (t("x - 2"), t("-x - 2"));
    let (b1, b2) = (t("1 - x"), t("x + 1"));
    let m = vec![
        vec![solve(&a1, &b1), solve(&a1, &b1)],
        vec![solve(&a2, &b2), solve(&a2, &b2)],
    ];
    let f = combine_interpolants(m).unwrap();
    assert_eq!(f.matrix.len(), 2);
    assert!(f.holds_at(&[3.0]).unwrap() && f.holds_at(&[-3.0]).unwrap());
    assert!(!f.holds_at(&[0.0]).unwrap());
    assert!(f.to_string().contains(" or "));
    let one = combine_interpolants(vec![vec![solve(&a1, &b1)]]).unwrap();
    assert!(!one.to_string().contains(" or "));
}

fn interval(env: &VarEnv, lo: f64, hi: f64) -> Vec<Polynomial> {
    let x = Polynomial::var_at(env, 0);
    vec![x.add_constant(-lo), (-&x).add_constant(hi)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // Construction margin on disjoint intervals, with a disequation thrown
    // into T1 so the monoid term is exercised.
    #[test]
    fn construction_margin_on_intervals(
        lo in -2.0f64..2.0,
        w1 in 0.1f64..1.5,
        gap in 0.2f64..1.5,
        w2 in 0.1f64..1.5,
        b in prop::sample::select(vec![2u32, 4]),
    ) {
        let env = VarEnv::new(["x"]).unwrap();
        let mid = lo + w1 / 2.0;
        let neq = Polynomial::var_at(&env, 0).add_constant(-mid);
        let t1 = Sas::new(&env, interval(&env, lo, lo + w1), vec![neq], vec![]).unwrap();
        let c = lo + w1 + gap;
        let t2 = Sas::new(&env, interval(&env, c, c + w2), vec![], vec![]).unwrap();
        let i = sn_interpolants(&t1, &t2, &none(), b, &InterpConfig::default()).unwrap();
        let i = i.expect("disjoint intervals are refutable");
        let grid = |a: f64, w: f64| (0..=40).map(|k| vec![a + w * k as f64 / 40.0]).collect::<Vec<_>>();
        let p1: Vec<_> = grid(lo, w1).into_iter().filter(|a| a[0] != mid).collect();
        let r = &i.certificate.residual;
        for a in &p1 {
            prop_assert!(i.q.eval(a).unwrap() >= 0.5 - r.eval(a).unwrap().abs() - 1e-9);
        }
        for a in &grid(c, w2) {
            prop_assert!(i.q.eval(a).unwrap() <= -0.5 + r.eval(a).unwrap().abs() + 1e-9);
        }
    }
}
