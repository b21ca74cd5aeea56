//! Flat torus bundles over a combinatorial base.
//!
//! A bundle is given in Čech form by a [`BaseComplex`] of charts and oriented
//! overlaps, each overlap `α -> β` labelled by a point-group element
//! `g_αβ`. Moving a fiber point across the overlap applies `ρ(g_αβ⁻¹)`,
//! the affine torus map of the inverse element, so nonsymmorphic translation
//! parts show up in holonomy and in the gluing of sampled sections.

mod complex;
mod cover;
mod holonomy;
mod section;

pub use complex::{BaseComplex, BundleReport, BundleViolation, FlatBundle};
pub use cover::CircleCover;
pub use holonomy::{
    common_fixed_points, equilibrium_sections, holonomy, holonomy_generators, AffineTorusMap,
    FixedPointSet, Loop,
};
pub use section::{
    check_derivative_gluing, check_section_gluing, covariant_differential, ChartGrid,
    CovariantDifferentialField, DerivativeGluingReport, EdgeDerivativeGluing, EdgeGluing, Overlap,
    SectionField, SectionGluingReport, WINDING_AMBIGUITY,
};

use crate::crystal::CrystalError;
use crate::exactalg::ExactError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BundleError {
    #[error("invalid base complex: {0}")]
    Structure(String),
    #[error("broken chain: {0}")]
    BrokenChain(String),
    #[error("no overlap between charts {from} and {to}")]
    UnknownEdge { from: usize, to: usize },
    #[error("chart {chart} has {samples} samples, at least 3 are needed")]
    TooFewSamples { chart: usize, samples: usize },
    #[error("invalid section: {0}")]
    Section(String),
    #[error("holonomy has no common fixed point, no equilibrium section exists")]
    NoEquilibrium,
    #[error(transparent)]
    Crystal(#[from] CrystalError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[cfg(test)]
mod tests;
