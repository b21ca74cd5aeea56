use nalgebra::DMatrix;
use num_bigint::BigInt;

use super::{CrystalError, Lattice, PointGroup, PointGroupElement};
use crate::exactalg::{solve_mod_lattice, IntMatrix, RatVector};

/// Point of the translation torus `R^d / Π`, in lattice coordinates,
/// stored as its representative in `[0, 1)^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusPoint {
    coords: RatVector,
}

impl TorusPoint {
    pub fn new(v: &RatVector) -> Self {
        Self {
            coords: v.reduce_mod_one(),
        }
    }

    pub fn coords(&self) -> &RatVector {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }
}

/// Outcome of the splitting test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmorphicVerdict {
    pub symmorphic: bool,
    /// Origin `t` with `a_p ≡ (I - A_p) t` for every `p`, when one exists.
    pub origin_shift: Option<RatVector>,
}

/// Violations of `A_p c(q,r) - c(pq,r) + c(p,qr) - c(p,q) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleReport {
    pub triples_checked: usize,
    pub violations: Vec<(usize, usize, usize)>,
}

impl CocycleReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Crystallographic group given by its point group and translation parts
/// `a_p`, kept reduced modulo `Z^d`.
///
/// Construction enforces that every cocycle value `c(p, q)` is an integer
/// vector, which is exactly the condition for the data to define an
/// extension of the point group by the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceGroup {
    lattice: Lattice,
    point_group: PointGroup,
    translations: Vec<RatVector>,
}

impl SpaceGroup {
    pub fn new(
        lattice: Lattice,
        point_group: PointGroup,
        translations: Vec<RatVector>,
    ) -> Result<Self, CrystalError> {
        let d = lattice.dim();
        if point_group.dim() != d {
            return Err(CrystalError::Shape(format!(
                "point group acts in dimension {}, lattice has dimension {d}",
                point_group.dim()
            )));
        }
        if translations.len() != point_group.order() {
            return Err(CrystalError::Shape(format!(
                "{} translation parts for a point group of order {}",
                translations.len(),
                point_group.order()
            )));
        }
        if let Some(i) = translations.iter().position(|t| t.dim() != d) {
            return Err(CrystalError::Shape(format!("translation {i} has wrong dimension")));
        }
        for (i, e) in point_group.elements().iter().enumerate() {
            if !lattice.preserves_gram(e.matrix()) {
                return Err(CrystalError::NotGramOrthogonal(format!("element {i}")));
            }
        }
        let sg = Self {
            lattice,
            point_group,
            translations: translations.iter().map(RatVector::reduce_mod_one).collect(),
        };
        if !sg.translations[0].is_zero() {
            return Err(CrystalError::Inconsistent(
                "identity carries a non-lattice translation".into(),
            ));
        }
        let n = sg.order();
        for p in 0..n {
            for q in 0..n {
                sg.cocycle(p, q)?;
            }
        }
        Ok(sg)
    }

    /// Symmorphic group: every translation part zero.
    pub fn symmorphic(lattice: Lattice, point_group: PointGroup) -> Result<Self, CrystalError> {
        let t = vec![RatVector::zeros(lattice.dim()); point_group.order()];
        Self::new(lattice, point_group, t)
    }

    /// Builds the group generated by `(A_s, a_s)` pairs. Translation parts of
    /// the remaining elements follow from `a_{gs} = a_g + A_g a_s`.
    pub fn from_generators(
        lattice: Lattice,
        generators: &[(IntMatrix, RatVector)],
        cap: usize,
    ) -> Result<Self, CrystalError> {
        let d = lattice.dim();
        if generators.is_empty() {
            return Self::symmorphic(lattice, PointGroup::trivial(d));
        }
        let elems = generators
            .iter()
            .map(|(m, _)| PointGroupElement::new(&lattice, m.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(i) = generators.iter().position(|(_, t)| t.dim() != d) {
            return Err(CrystalError::Shape(format!("generator {i} translation has wrong dimension")));
        }
        let pg = PointGroup::generate(&elems, cap)?;
        let mut translations = vec![RatVector::zeros(d); pg.order()];
        for i in 1..pg.order() {
            let (parent, gen) = pg.provenance(i).expect("non-identity element has a parent");
            let a_gen = &generators[gen].1;
            let rotated = RatVector::new(pg.element(parent).matrix().mul_rat(a_gen.as_slice())?);
            translations[i] = (&translations[parent] + &rotated).reduce_mod_one();
        }
        for (gi, (m, t)) in generators.iter().enumerate() {
            let idx = pg.index_of(m).expect("generator lies in its closure");
            if t.reduce_mod_one() != translations[idx] {
                return Err(CrystalError::Inconsistent(format!(
                    "generator {gi} translation {t} disagrees with the derived value {}",
                    translations[idx]
                )));
            }
        }
        Self::new(lattice, pg, translations)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn point_group(&self) -> &PointGroup {
        &self.point_group
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn order(&self) -> usize {
        self.point_group.order()
    }

    pub fn translation(&self, p: usize) -> &RatVector {
        &self.translations[p]
    }

    pub fn translations(&self) -> &[RatVector] {
        &self.translations
    }

    pub fn linear(&self, p: usize) -> &IntMatrix {
        self.point_group.element(p).matrix()
    }

    fn check_index(&self, p: usize) -> Result<(), CrystalError> {
        if p < self.order() {
            Ok(())
        } else {
            Err(CrystalError::IndexOutOfRange { index: p, order: self.order() })
        }
    }

    /// `c(p, q) = a_p + A_p a_q - a_{pq}`.
    pub fn cocycle(&self, p: usize, q: usize) -> Result<Vec<BigInt>, CrystalError> {
        self.check_index(p)?;
        self.check_index(q)?;
        let pq = self.point_group.multiply(p, q);
        let rotated = RatVector::new(self.linear(p).mul_rat(self.translations[q].as_slice())?);
        let c = &(&self.translations[p] + &rotated) - &self.translations[pq];
        c.to_integers().ok_or_else(|| {
            CrystalError::Inconsistent(format!("c({p},{q}) = {c} is not a lattice vector"))
        })
    }

    pub fn cocycle_table(&self) -> Vec<Vec<Vec<BigInt>>> {
        let n = self.order();
        (0..n)
            .map(|p| {
                (0..n)
                    .map(|q| self.cocycle(p, q).expect("validated at construction"))
                    .collect()
            })
            .collect()
    }

    /// Checks the 2-cocycle identity on every triple.
    pub fn verify_cocycle_identity(&self) -> CocycleReport {
        let n = self.order();
        let c = self.cocycle_table();
        let g = &self.point_group;
        let mut violations = Vec::new();
        for p in 0..n {
            for q in 0..n {
                let pq = g.multiply(p, q);
                for r in 0..n {
                    let qr = g.multiply(q, r);
                    let acqr = self.linear(p).mul_int(&c[q][r]).expect("square");
                    let ok = (0..self.dim()).all(|k| {
                        &acqr[k] - &c[pq][r][k] + &c[p][qr][k] - &c[p][q][k] == BigInt::ZERO
                    });
                    if !ok {
                        violations.push((p, q, r));
                    }
                }
            }
        }
        CocycleReport {
            triples_checked: n * n * n,
            violations,
        }
    }

    /// Decides whether the extension splits by solving
    /// `(I - A_p) t ≡ a_p (mod Z^d)` simultaneously for all `p ≠ e`.
    pub fn is_symmorphic(&self) -> Result<SymmorphicVerdict, CrystalError> {
        let d = self.dim();
        if self.order() == 1 {
            return Ok(SymmorphicVerdict {
                symmorphic: true,
                origin_shift: Some(RatVector::zeros(d)),
            });
        }
        let id = IntMatrix::identity(d);
        let mut blocks = Vec::with_capacity(self.order() - 1);
        let mut rhs = Vec::with_capacity((self.order() - 1) * d);
        for p in 1..self.order() {
            blocks.push(id.sub(self.linear(p))?);
            rhs.extend(self.translations[p].iter().cloned());
        }
        let m = IntMatrix::stack(&blocks)?;
        let sol = solve_mod_lattice(&m, &RatVector::new(rhs))?;
        Ok(SymmorphicVerdict {
            symmorphic: sol.solvable,
            origin_shift: sol.particular.map(|t| t.reduce_mod_one()),
        })
    }

    /// New representatives `a'_p = a_p + b_p + (A_p - I) x₀ (mod Z^d)`.
    ///
    /// `lattice_shifts` is either empty or holds one integer vector `b_p` per
    /// element with `b_e = 0`; since translations are stored modulo `Z^d`
    /// these act trivially on the stored data.
    pub fn shift_representatives(
        &self,
        lattice_shifts: &[Vec<BigInt>],
        origin: &RatVector,
    ) -> Result<SpaceGroup, CrystalError> {
        let d = self.dim();
        if origin.dim() != d {
            return Err(CrystalError::Shape("origin shift has wrong dimension".into()));
        }
        if !lattice_shifts.is_empty() {
            if lattice_shifts.len() != self.order() || lattice_shifts.iter().any(|b| b.len() != d) {
                return Err(CrystalError::Shape("one lattice shift per element required".into()));
            }
            if lattice_shifts[0].iter().any(|x| *x != BigInt::ZERO) {
                return Err(CrystalError::Shape("identity lattice shift must vanish".into()));
            }
        }
        let mut translations = Vec::with_capacity(self.order());
        for p in 0..self.order() {
            let ax = RatVector::new(self.linear(p).mul_rat(origin.as_slice())?);
            let mut a = &(&self.translations[p] + &ax) - origin;
            if let Some(b) = lattice_shifts.get(p) {
                a = &a + &RatVector::from_big_ints(b);
            }
            translations.push(a);
        }
        SpaceGroup::new(self.lattice.clone(), self.point_group.clone(), translations)
    }

    /// `ρ(p)[v] = [A_p v + a_p]`.
    pub fn torus_act(&self, p: usize, v: &TorusPoint) -> Result<TorusPoint, CrystalError> {
        self.check_index(p)?;
        if v.dim() != self.dim() {
            return Err(CrystalError::Shape("torus point has wrong dimension".into()));
        }
        let av = RatVector::new(self.linear(p).mul_rat(v.coords().as_slice())?);
        Ok(TorusPoint::new(&(&av + &self.translations[p])))
    }

    /// Cartesian orthogonal matrices `B A_p B⁻¹`, one per element.
    pub fn cartesian_representation(&self) -> Result<Vec<DMatrix<f64>>, CrystalError> {
        self.point_group
            .elements()
            .iter()
            .map(|e| self.lattice.to_cartesian(e.matrix()))
            .collect()
    }

    /// Same point group with every translation part set to zero.
    pub fn linear_part(&self) -> SpaceGroup {
        Self::symmorphic(self.lattice.clone(), self.point_group.clone())
            .expect("zero translations are always admissible")
    }
}
