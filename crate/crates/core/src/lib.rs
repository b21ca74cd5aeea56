//! Crystallographic group extensions, flat torus bundles and the acoustic
//! phonon sector of a crystal.
//!
//! - [`exactalg`]: Smith normal form and congruences modulo the integer lattice.
//! - [`crystal`]: lattices, point groups, space groups, the extension cocycle,
//!   symmorphicity and the affine action on the translation torus.
//! - [`bundle`]: Čech model of a flat torus bundle, holonomy, equilibrium
//!   sections and gluing checks for sampled sections.
//! - [`phonon`]: elastic and density tensors, symmetry projection, Christoffel
//!   matrices, dispersion, closed forms and a leapfrog wave simulator.

pub mod exactalg;
pub mod crystal;
pub mod bundle;
pub mod phonon;
