//! Exact rationals, dense matrices, Hermitian eigensolvers and exact rank.

mod eigen;
mod matrix;
mod rank;
mod rational;

pub use eigen::{cholesky, eig_hermitian, eig_symmetric, min_eigenvalue_symmetric};
pub use matrix::{kron, ComplexMatrix, DenseMatrix, RationalMatrix, RealMatrix};
pub use rank::{exact_rank, exact_rank_bareiss, exact_rank_integer_rows};
pub use rational::{
    approximate_rational, dyadic_rational, format_decimal, format_rational, parse_rational,
    rational_to_f64, Rational,
};
