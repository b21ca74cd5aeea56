use std::collections::HashMap;

use num_traits::Signed;
use num_traits::One;

use super::{CrystalError, Lattice};
use crate::exactalg::IntMatrix;

/// Default bound on the closure size. The largest finite subgroup of
/// `GL(3, Z)` has order 48.
pub const DEFAULT_GROUP_CAP: usize = 1024;

/// Linear part `A_p` of a point-group element, in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointGroupElement {
    matrix: IntMatrix,
}

impl PointGroupElement {
    /// Checks `det A = ±1` and `Aᵀ G A = G` against the lattice Gram matrix.
    pub fn new(lattice: &Lattice, matrix: IntMatrix) -> Result<Self, CrystalError> {
        let d = lattice.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(CrystalError::Shape(format!(
                "point-group matrix is {}x{}, lattice dimension is {d}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.determinant()?.abs().is_one() {
            return Err(CrystalError::NotUnimodular);
        }
        if !lattice.preserves_gram(&matrix) {
            return Err(CrystalError::NotGramOrthogonal(matrix.to_string()));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: IntMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Finite group of integer matrices with precomputed multiplication and
/// inverse tables. Element `0` is always the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointGroup {
    elements: Vec<PointGroupElement>,
    mult: Vec<usize>,
    inverse: Vec<usize>,
    // (parent, generator) such that element = parent * generator
    provenance: Vec<Option<(usize, usize)>>,
    lookup: HashMap<IntMatrix, usize>,
}

impl PointGroup {
    /// Closure of the generators under multiplication.
    ///
    /// Elements are listed in breadth-first order: the identity, then each
    /// new product `g * s` as `g` runs through the list and `s` through the
    /// generators in the given order. Distinct non-identity generators
    /// therefore come first after the identity.
    pub fn generate(generators: &[PointGroupElement], cap: usize) -> Result<Self, CrystalError> {
        let d = match generators.first() {
            Some(g) => g.dim(),
            None => return Err(CrystalError::Shape("no generators given; use PointGroup::trivial".into())),
        };
        if generators.iter().any(|g| g.dim() != d) {
            return Err(CrystalError::Shape("generators differ in dimension".into()));
        }
        Self::closure(d, generators, cap)
    }

    pub fn trivial(d: usize) -> Self {
        Self::closure(d, &[], 1).expect("trivial group fits any cap")
    }

    fn closure(d: usize, generators: &[PointGroupElement], cap: usize) -> Result<Self, CrystalError> {
        let identity = IntMatrix::identity(d);
        let mut elements = vec![PointGroupElement::new_unchecked(identity.clone())];
        let mut provenance = vec![None];
        let mut lookup = HashMap::from([(identity, 0usize)]);
        let mut head = 0;
        while head < elements.len() {
            for (gi, g) in generators.iter().enumerate() {
                let prod = elements[head].matrix.mul(&g.matrix)?;
                if lookup.contains_key(&prod) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(CrystalError::CapExceeded { cap });
                }
                lookup.insert(prod.clone(), elements.len());
                elements.push(PointGroupElement::new_unchecked(prod));
                provenance.push(Some((head, gi)));
            }
            head += 1;
        }

        let n = elements.len();
        let mut mult = vec![0usize; n * n];
        for i in 0..n {
            for j in 0..n {
                let prod = elements[i].matrix.mul(&elements[j].matrix)?;
                // closure under right multiplication by generators implies
                // closure under products for a finite set of invertible matrices
                mult[i * n + j] = *lookup
                    .get(&prod)
                    .ok_or_else(|| CrystalError::Shape("closure is not a group".into()))?;
            }
        }
        let inverse = (0..n)
            .map(|i| {
                (0..n)
                    .find(|&j| mult[i * n + j] == 0)
                    .ok_or_else(|| CrystalError::Shape("element without inverse".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(Self {
            elements,
            mult,
            inverse,
            provenance,
            lookup,
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn elements(&self) -> &[PointGroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &PointGroupElement {
        &self.elements[i]
    }

    #[inline]
    pub fn multiply(&self, p: usize, q: usize) -> usize {
        self.mult[p * self.order() + q]
    }

    #[inline]
    pub fn inverse(&self, p: usize) -> usize {
        self.inverse[p]
    }

    pub fn index_of(&self, m: &IntMatrix) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    pub(crate) fn provenance(&self, i: usize) -> Option<(usize, usize)> {
        self.provenance[i]
    }

    /// Order of a single element.
    pub fn element_order(&self, p: usize) -> usize {
        let mut k = 1;
        let mut acc = p;
        while acc != 0 {
            acc = self.multiply(acc, p);
            k += 1;
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elem(lat: &Lattice, rows: &[&[i64]]) -> PointGroupElement {
        PointGroupElement::new(lat, IntMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn reflection_in_one_dimension() {
        let lat = Lattice::cubic(1);
        let g = PointGroup::generate(&[elem(&lat, &[&[-1]])], DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.inverse(1), 1);
    }

    #[test]
    fn fourfold_rotation_in_plane() {
        let lat = Lattice::cubic(2);
        let g = PointGroup::generate(&[elem(&lat, &[&[0, -1], &[1, 0]])], DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.element_order(1), 4);
    }

    #[test]
    fn hexagonal_sixfold() {
        let lat = Lattice::hexagonal_2d();
        let g = PointGroup::generate(&[elem(&lat, &[&[1, -1], &[1, 0]])], DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 6);
    }

    #[test]
    fn rejects_non_orthogonal_generator() {
        let lat = Lattice::cubic(2);
        let shear = IntMatrix::from_rows(&[[1, 1], [0, 1]]).unwrap();
        assert!(matches!(
            PointGroupElement::new(&lat, shear),
            Err(CrystalError::NotGramOrthogonal(_))
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let lat = Lattice::cubic(3);
        let gens = [
            elem(&lat, &[&[0, -1, 0], &[1, 0, 0], &[0, 0, 1]]),
            elem(&lat, &[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]),
        ];
        assert!(matches!(
            PointGroup::generate(&gens, 10),
            Err(CrystalError::CapExceeded { cap: 10 })
        ));
        assert_eq!(PointGroup::generate(&gens, 24).unwrap().order(), 24);
    }

    #[test]
    fn tables_are_consistent() {
        let lat = Lattice::cubic(3);
        let gens = [
            elem(&lat, &[&[0, -1, 0], &[1, 0, 0], &[0, 0, 1]]),
            elem(&lat, &[&[-1, 0, 0], &[0, -1, 0], &[0, 0, -1]]),
        ];
        let g = PointGroup::generate(&gens, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 8);
        for p in 0..g.order() {
            assert_eq!(g.multiply(p, g.inverse(p)), 0);
            assert_eq!(g.multiply(0, p), p);
            for q in 0..g.order() {
                let prod = g.element(p).matrix().mul(g.element(q).matrix()).unwrap();
                assert_eq!(g.index_of(&prod), Some(g.multiply(p, q)));
            }
        }
    }
}
