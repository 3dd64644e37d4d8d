//! Block-diagonal semidefinite programs in primal standard form and a dense
//! primal-dual interior-point solver.

mod linalg;
mod matrix;
mod problem;
mod solver;

pub use matrix::{eigenvalues, inner, min_eigenvalue, psd_factor, BlockMatrix, Entry, SparseBlockMatrix, SymMatrix};
pub use problem::SdpProblem;
pub use solver::{
    feasibility, feasibility_with_solution, solve, solve_with_observer, Feasibility, IterateView,
    IterationRecord, SdpSolution, SdpStatus, SolverConfig,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("block dimensions do not conform")]
    DimensionMismatch,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_by_one(c: f64, a: f64, b: f64) -> SdpProblem {
        let e = |value| Entry { block: 0, i: 0, j: 0, value };
        SdpProblem::new(
            vec![1],
            SparseBlockMatrix::new([e(c)]),
            vec![SparseBlockMatrix::new([e(a)])],
            vec![b],
        )
        .unwrap()
    }

    #[test]
    fn scalar_optimum() {
        let sol = solve(&one_by_one(1.0, 1.0, 1.0), &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-7);
        assert!((sol.x.block(0).get(0, 0) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn diagonal_objective() {
        let e = |i, j, value| Entry { block: 0, i, j, value };
        let p = SdpProblem::new(
            vec![2],
            SparseBlockMatrix::new([e(0, 0, 1.0), e(1, 1, 2.0)]),
            vec![SparseBlockMatrix::new([e(0, 0, 1.0), e(1, 1, 1.0)])],
            vec![2.0],
        )
        .unwrap();
        let sol = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective - 2.0).abs() < 1e-6);
        assert!((sol.x.block(0).get(0, 0) - 2.0).abs() < 1e-5);
        assert!(sol.x.block(0).get(1, 1).abs() < 1e-5);
    }

    #[test]
    fn negative_trace_infeasible() {
        let p = one_by_one(1.0, 1.0, -1.0);
        let sol = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        let ray = sol.ray.unwrap();
        assert!((ray[0] * -1.0 - 1.0).abs() < 1e-9 && ray[0] < 0.0);
        assert_eq!(feasibility(&p, &SolverConfig::default()), Feasibility::Infeasible);
    }

    #[test]
    fn feasibility_examples() {
        match feasibility(&one_by_one(0.0, 1.0, 1.0), &SolverConfig::default()) {
            Feasibility::Feasible(x) => assert!((x.block(0).get(0, 0) - 1.0).abs() < 1e-7),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_rows_removed() {
        let e = |value| Entry { block: 0, i: 0, j: 0, value };
        let a = SparseBlockMatrix::new([e(1.0)]);
        let p = SdpProblem::new(
            vec![1],
            SparseBlockMatrix::new([e(1.0)]),
            vec![a.clone(), a.scaled(2.0)],
            vec![1.0, 2.0],
        )
        .unwrap();
        let sol = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let bad = SdpProblem { b: vec![1.0, 3.0], ..p };
        let sol = solve(&bad, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        let ray = sol.ray.unwrap();
        assert!((ray[0] + 3.0 * ray[1] - 1.0).abs() < 1e-9);
        assert!((ray[0] + 2.0 * ray[1]).abs() < 1e-9);
    }
}
