use psatz::sdp::{solve, solve_with_observer, SdpStatus, SolverConfig};
use psatz_bench::instances::{complementary_instance, random_shape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn constructed_optima_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SolverConfig::default();
    let mut worst_iters = 0;
    for case in 0..100 {
        let (dims, m) = random_shape(&mut rng, 20, 30);
        let inst = complementary_instance(&mut rng, &dims, m);
        let sol = solve(&inst.problem, &cfg).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal, "case {case} dims {dims:?} m {m}");
        assert!(sol.gap <= 1e-6, "case {case}: gap {}", sol.gap);
        let err = (sol.primal_objective - inst.optimal_value).abs();
        assert!(
            err <= 1e-5 * (1.0 + inst.optimal_value.abs()),
            "case {case}: objective {} vs {}",
            sol.primal_objective,
            inst.optimal_value
        );
        worst_iters = worst_iters.max(sol.iterations);
    }
    assert!(worst_iters < 100, "worst iteration count {worst_iters}");
}

#[test]
fn iterates_stay_interior_and_mu_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = SolverConfig::default();
    for _ in 0..10 {
        let (dims, m) = random_shape(&mut rng, 8, 12);
        let inst = complementary_instance(&mut rng, &dims, m);
        let mut mus = Vec::new();
        let sol = solve_with_observer(&inst.problem, &cfg, |it| {
            assert!(it.min_eigenvalue_x() > 0.0);
            assert!(it.min_eigenvalue_s() > 0.0);
            let r = it.record;
            let scale = 1.0 + r.primal_objective.abs() + r.dual_objective.abs();
            assert!(r.dual_objective <= r.primal_objective + 1e-6 * scale);
            mus.push(r.mu);
        })
        .unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(mus.windows(2).all(|w| w[1] <= w[0]), "{mus:?}");
    }
}
