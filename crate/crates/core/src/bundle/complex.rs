use std::collections::HashMap;

use super::BundleError;
use crate::crystal::SpaceGroup;

/// Combinatorial cover of the base: charts, oriented overlaps and filled
/// triangles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseComplex {
    charts: usize,
    edges: Vec<(usize, usize)>,
    triangles: Vec<[usize; 3]>,
    index: HashMap<(usize, usize), usize>,
}

impl BaseComplex {
    pub fn new(
        charts: usize,
        edges: Vec<(usize, usize)>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, BundleError> {
        let mut index = HashMap::with_capacity(edges.len());
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a >= charts || b >= charts {
                return Err(BundleError::Structure(format!(
                    "edge {e} ({a}->{b}) references a chart outside 0..{charts}"
                )));
            }
            if a == b {
                return Err(BundleError::Structure(format!("edge {e} is a self-loop")));
            }
            if index.insert((a, b), e).is_some() {
                return Err(BundleError::Structure(format!("duplicate edge {a}->{b}")));
            }
        }
        let complex = Self {
            charts,
            edges,
            triangles,
            index,
        };
        for t in &complex.triangles {
            let [a, b, c] = *t;
            if a == b || b == c || a == c {
                return Err(BundleError::Structure(format!("degenerate triangle {t:?}")));
            }
            for (x, y) in [(a, b), (b, c), (a, c)] {
                if complex.find(x, y).is_none() {
                    return Err(BundleError::Structure(format!(
                        "triangle {t:?} is missing the overlap {x}-{y}"
                    )));
                }
            }
        }
        Ok(complex)
    }

    pub fn charts(&self) -> usize {
        self.charts
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Edge index for `from -> to`, and whether it is stored reversed.
    pub fn find(&self, from: usize, to: usize) -> Option<(usize, bool)> {
        self.index
            .get(&(from, to))
            .map(|&e| (e, false))
            .or_else(|| self.index.get(&(to, from)).map(|&e| (e, true)))
    }

    /// Undirected adjacency, each list sorted ascending.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.charts];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BundleViolation {
    /// Both orientations of an overlap are present and are not inverse.
    ReverseMismatch { from: usize, to: usize },
    /// `g_ab * g_bc != g_ac` on a filled triangle.
    TriangleCocycle { triangle: [usize; 3] },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleReport {
    pub violations: Vec<BundleViolation>,
}

impl BundleReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flat torus bundle in Čech form: each oriented overlap `α -> β` carries a
/// point-group element `g_αβ` (convention `z_β = z_α g_αβ`).
#[derive(Clone, Debug, PartialEq)]
pub struct FlatBundle {
    base: BaseComplex,
    space_group: SpaceGroup,
    transitions: Vec<usize>,
}

impl FlatBundle {
    pub fn new(
        base: BaseComplex,
        space_group: SpaceGroup,
        transitions: Vec<usize>,
    ) -> Result<Self, BundleError> {
        if transitions.len() != base.edges().len() {
            return Err(BundleError::Structure(format!(
                "{} transitions for {} edges",
                transitions.len(),
                base.edges().len()
            )));
        }
        if let Some(&g) = transitions.iter().find(|&&g| g >= space_group.order()) {
            return Err(BundleError::Structure(format!(
                "transition element {g} outside a group of order {}",
                space_group.order()
            )));
        }
        Ok(Self {
            base,
            space_group,
            transitions,
        })
    }

    pub fn base(&self) -> &BaseComplex {
        &self.base
    }

    pub fn space_group(&self) -> &SpaceGroup {
        &self.space_group
    }

    pub fn transitions(&self) -> &[usize] {
        &self.transitions
    }

    pub fn dim(&self) -> usize {
        self.space_group.dim()
    }

    /// Same transitions over a different group with the same point group
    /// ordering, e.g. [`SpaceGroup::linear_part`].
    pub fn with_space_group(&self, space_group: SpaceGroup) -> Result<Self, BundleError> {
        if space_group.point_group() != self.space_group.point_group() {
            return Err(BundleError::Structure("point groups differ".into()));
        }
        Self::new(self.base.clone(), space_group, self.transitions.clone())
    }

    /// `g_{from,to}`; a stored reverse edge contributes its inverse.
    pub fn transition(&self, from: usize, to: usize) -> Option<usize> {
        let (e, reversed) = self.base.find(from, to)?;
        let g = self.transitions[e];
        Some(if reversed {
            self.space_group.point_group().inverse(g)
        } else {
            g
        })
    }

    /// Checks edge inverses and the cocycle condition on each triangle.
    pub fn validate(&self) -> BundleReport {
        let pg = self.space_group.point_group();
        let mut violations = Vec::new();
        for (e, &(a, b)) in self.base.edges().iter().enumerate() {
            if a < b {
                if let Some(&r) = self.base.index.get(&(b, a)) {
                    if pg.multiply(self.transitions[e], self.transitions[r]) != pg.identity() {
                        violations.push(BundleViolation::ReverseMismatch { from: a, to: b });
                    }
                }
            }
        }
        for &[a, b, c] in self.base.triangles() {
            let ab = self.transition(a, b).expect("checked at construction");
            let bc = self.transition(b, c).expect("checked at construction");
            let ac = self.transition(a, c).expect("checked at construction");
            if pg.multiply(ab, bc) != ac {
                violations.push(BundleViolation::TriangleCocycle { triangle: [a, b, c] });
            }
        }
        BundleReport { violations }
    }
}
