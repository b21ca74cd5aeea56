//! Lattices, point groups and crystallographic extensions.
//!
//! All group-theoretic data live in lattice coordinates: linear parts are
//! integer matrices and translation parts are rationals reduced modulo
//! `Z^d`. [`SpaceGroup::cartesian_representation`] is the only bridge to
//! floating-point Cartesian matrices.

mod lattice;
mod point_group;
mod space_group;

pub use lattice::{Lattice, MAX_BASIS_CONDITION};
pub use point_group::{PointGroup, PointGroupElement, DEFAULT_GROUP_CAP};
pub use space_group::{CocycleReport, SpaceGroup, SymmorphicVerdict, TorusPoint};

use crate::exactalg::ExactError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CrystalError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("gram matrix is not symmetric at ({row}, {col})")]
    GramNotSymmetric { row: usize, col: usize },
    #[error("gram matrix is not positive definite (leading minor {minor})")]
    NotPositiveDefinite { minor: usize },
    #[error("gram entry ({row}, {col}) does not match the basis")]
    GramMismatch { row: usize, col: usize },
    #[error("lattice basis is singular")]
    SingularBasis,
    #[error("basis condition number {condition:.3e} exceeds the allowed bound")]
    IllConditioned { condition: f64 },
    #[error("matrix does not have determinant ±1")]
    NotUnimodular,
    #[error("matrix {0} does not preserve the gram form")]
    NotGramOrthogonal(String),
    #[error("point group is not finite within cap {cap}")]
    CapExceeded { cap: usize },
    #[error("not a crystallographic extension: {0}")]
    Inconsistent(String),
    #[error("element index {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}
