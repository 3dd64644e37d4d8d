//! Sparse multivariate polynomials over a fixed, ordered variable environment.
//!
//! Coefficients are `f64`. Every arithmetic result is canonical: terms are kept
//! in graded-lexicographic order and coefficients with magnitude at most
//! [`DROP_TOLERANCE`] are removed.

mod basis;
mod env;
mod monomial;
mod parse;
mod polynomial;

pub use basis::{binomial, monomial_basis, GramBasis};
pub use env::VarEnv;
pub use monomial::Monomial;
pub use parse::{parse_poly, ParseError, ParseErrorKind};
pub use polynomial::{Polynomial, DROP_TOLERANCE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("polynomials live in different variable environments")]
    EnvMismatch,
    #[error("point has {got} coordinates, environment has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}
