use nalgebra::DMatrix;

use crystorus::crystal::{Lattice, SpaceGroup, DEFAULT_GROUP_CAP};
use crystorus::exactalg::{IntMatrix, RatVector};

/// Full cubic group from a fourfold z rotation, the inversion and the
/// threefold [111] rotation.
pub fn oh() -> SpaceGroup {
    let gens = [
        IntMatrix::from_rows(&[[0, -1, 0], [1, 0, 0], [0, 0, 1]]).unwrap(),
        IntMatrix::diagonal(&[-1, -1, -1]),
        IntMatrix::from_rows(&[[0, 0, 1], [1, 0, 0], [0, 1, 0]]).unwrap(),
    ];
    let gens: Vec<(IntMatrix, RatVector)> = gens.into_iter().map(|m| (m, RatVector::zeros(3))).collect();
    SpaceGroup::from_generators(Lattice::cubic(3), &gens, DEFAULT_GROUP_CAP).unwrap()
}

pub fn oh_cartesian() -> Vec<DMatrix<f64>> {
    oh().cartesian_representation().unwrap()
}
