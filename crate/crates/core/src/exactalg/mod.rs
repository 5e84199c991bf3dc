//! Exact arithmetic: rationals, dense matrices, sparse row reduction and
//! multivariate polynomials.

pub mod matrix;
pub mod poly;
pub mod rational;
pub mod sparse;
pub mod univariate;

pub use matrix::{nullspace, solve_linear, QMatrix, Solution};
pub use poly::{make_vars, PolyMatrix, PolyQ, Vars};
pub use rational::{q, qf, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("missing variable in assignment: {0}")]
    MissingVariable(String),
    #[error("cannot parse rational: {0}")]
    Parse(String),
}
