//! Acoustic phonons of a crystal in the constant-coefficient, time-reversal
//! invariant approximation.
//!
//! Everything here is Cartesian and floating point. Point-group matrices
//! enter through [`crate::crystal::SpaceGroup::cartesian_representation`].
//!
//! Elastic tensors are stored as `C^{ab}_{ij}` with spatial indices `a, b`
//! and displacement indices `i, j`; the energy density of a displacement
//! gradient `g[(b, j)] = ∂_b φ^j` is `½ C^{ab}_{ij} g[(a, i)] g[(b, j)]`.

mod closed_form;
mod dispersion;
mod projection;
mod simulate;
mod tensor;

pub use closed_form::{cubic_christoffel, cubic_energy, stress, CubicModuli, IsotropicModuli};
pub use dispersion::{
    christoffel, dispersion, kpath_sweep, DispersionResult, DispersionRow, DispersionTable,
    DEGENERACY_TOL, INSTABILITY_TOL,
};
pub use projection::{invariant_objective_dimension, project_invariant, project_invariant_density};
pub use simulate::{
    max_stable_dt, simulate_wave, EnergySample, ModeFrequency, Trajectory, WaveState, DEFAULT_CFL,
};
pub use tensor::{
    assemble_cubic, assemble_isotropic, elastic_energy, noether_momenta, DensityMatrix,
    ElasticTensor,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhononError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("density not positive definite")]
    DensityNotPositiveDefinite,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("elastic tensor lacks major symmetry at {0:?}")]
    MajorSymmetry([usize; 4]),
    #[error("elastic tensor flagged objective lacks minor symmetry at {0:?}")]
    MinorSymmetry([usize; 4]),
    #[error("empty group")]
    EmptyGroup,
    #[error("matrix list is not closed under multiplication")]
    NotClosed,
    #[error("invalid moduli: {0}")]
    InvalidModuli(String),
    #[error("time step {dt:e} violates the stability bound, use dt <= {max_dt:e}")]
    Cfl { dt: f64, max_dt: f64 },
    #[error("invalid input: {0}")]
    Input(String),
}
