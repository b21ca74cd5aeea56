//! Exact integer and rational linear algebra.
//!
//! Everything here works over `BigInt`/`BigRational`; group-theoretic
//! decisions elsewhere in the crate are made with these routines and no
//! floating-point tolerance.

mod lattice_solve;
mod matrix;
pub mod rational;
mod snf;

pub use lattice_solve::{solve_mod_lattice, ModLatticeSolution, MAX_DISCRETE_OFFSETS};
pub use matrix::IntMatrix;
pub use rational::RatVector;
pub use snf::{smith_normal_form, SnfDecomposition};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("solution set has more than {MAX_DISCRETE_OFFSETS} discrete cosets")]
    TooManyCosets,
}
