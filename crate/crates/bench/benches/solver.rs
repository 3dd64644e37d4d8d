use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use psatz::certgen::{certificate_generation, CertConfig};
use psatz::interp::{sn_interpolants, InterpConfig};
use psatz::poly::{monomial_basis, parse_poly, Polynomial, VarEnv};
use psatz::sas::{DefEquations, Sas};
use psatz::sdp::{solve, SolverConfig};
use psatz_bench::instances::complementary_instance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sdp(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (dims, m) in [(vec![5, 5], 10), (vec![20], 30), (vec![10, 10, 10], 30)] {
        let inst = complementary_instance(&mut rng, &dims, m);
        let cfg = SolverConfig::default();
        c.bench_function(&format!("sdp {dims:?} m={m}"), |b| b.iter(|| solve(black_box(&inst.problem), &cfg).unwrap()));
    }
}

fn certificates(c: &mut Criterion) {
    let env = VarEnv::new(["x"]).unwrap();
    let fs = [parse_poly("x", &env).unwrap(), parse_poly("-x - 1", &env).unwrap()];
    let zero = Polynomial::zero(&env);
    c.bench_function("certificate interval pair b=2", |b| {
        b.iter(|| certificate_generation(black_box(&fs), &zero, &[], 2, &CertConfig::default()).unwrap())
    });

    let env = VarEnv::new(["x", "y", "x'", "y'"]).unwrap();
    let p = |v: &[&str]| v.iter().map(|s| parse_poly(s, &env).unwrap()).collect::<Vec<_>>();
    let t1 = Sas::new(
        &env,
        p(&["1 - x^2 - y^2"]),
        p(&["1 - x^2 - y^2"]),
        p(&["x^2 + y - 1 - x'", "y + x'*y + 1 - y'"]),
    )
    .unwrap();
    let t2 = Sas::new(&env, p(&["x'^2 - 2*y'^2 - 4"]), vec![], vec![]).unwrap();
    let mut group = c.benchmark_group("interpolation");
    group.sample_size(10);
    group.bench_function("running example b=4", |b| {
        b.iter(|| sn_interpolants(&t1, &t2, &DefEquations::empty(), 4, &InterpConfig::default()).unwrap())
    });
    group.finish();
}

fn bases(c: &mut Criterion) {
    let env = VarEnv::new((0..6).map(|i| format!("v{i}"))).unwrap();
    c.bench_function("monomial basis n=6 d=4", |b| b.iter(|| monomial_basis(black_box(&env), 4)));
}

criterion_group!(benches, sdp, certificates, bases);
criterion_main!(benches);
