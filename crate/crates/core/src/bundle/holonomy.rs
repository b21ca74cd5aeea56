use std::collections::VecDeque;

use super::{BundleError, FlatBundle};
use crate::crystal::{SpaceGroup, TorusPoint};
use crate::exactalg::{solve_mod_lattice, IntMatrix, RatVector};

/// Affine map `[v] -> [A v + a]` of the torus, `a` kept in `[0, 1)^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineTorusMap {
    pub linear: IntMatrix,
    pub shift: RatVector,
}

impl AffineTorusMap {
    pub fn identity(d: usize) -> Self {
        Self {
            linear: IntMatrix::identity(d),
            shift: RatVector::zeros(d),
        }
    }

    /// `ρ(p)` for an element of the space group.
    pub fn of_element(sg: &SpaceGroup, p: usize) -> Self {
        Self {
            linear: sg.linear(p).clone(),
            shift: sg.translation(p).clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.dim()
    }

    pub fn apply(&self, v: &TorusPoint) -> TorusPoint {
        let av = RatVector::new(
            self.linear
                .mul_rat(v.coords().as_slice())
                .expect("dimension checked by caller"),
        );
        TorusPoint::new(&(&av + &self.shift))
    }

    /// `next ∘ self`: apply `self` first.
    pub fn then(&self, next: &AffineTorusMap) -> AffineTorusMap {
        let linear = next.linear.mul(&self.linear).expect("same dimension");
        let moved = RatVector::new(next.linear.mul_rat(self.shift.as_slice()).expect("same dimension"));
        AffineTorusMap {
            linear,
            shift: (&moved + &next.shift).reduce_mod_one(),
        }
    }

    pub fn inverse(&self) -> AffineTorusMap {
        let inv = self
            .linear
            .inverse_unimodular()
            .expect("torus maps have unimodular linear part");
        let back = RatVector::new(inv.mul_rat(self.shift.as_slice()).expect("square"));
        AffineTorusMap {
            linear: inv,
            shift: (-&back).reduce_mod_one(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.linear == IntMatrix::identity(self.dim()) && self.shift.is_zero()
    }

    pub fn fixes(&self, v: &TorusPoint) -> bool {
        &self.apply(v) == v
    }
}

/// Closed walk through the cover as a list of directed steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    steps: Vec<(usize, usize)>,
}

impl Loop {
    pub fn new(steps: Vec<(usize, usize)>) -> Result<Self, BundleError> {
        if steps.is_empty() {
            return Err(BundleError::BrokenChain("empty loop".into()));
        }
        for w in steps.windows(2) {
            if w[0].1 != w[1].0 {
                return Err(BundleError::BrokenChain(format!(
                    "step {:?} is not followed by a step leaving chart {}",
                    w[0], w[0].1
                )));
            }
        }
        let (first, last) = (steps[0].0, steps[steps.len() - 1].1);
        if first != last {
            return Err(BundleError::BrokenChain(format!(
                "loop starts at chart {first} but ends at {last}"
            )));
        }
        Ok(Self { steps })
    }

    /// Loop visiting the given charts, e.g. `[0, 1, 2, 0]`.
    pub fn through(charts: &[usize]) -> Result<Self, BundleError> {
        Self::new(charts.windows(2).map(|w| (w[0], w[1])).collect())
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn start(&self) -> usize {
        self.steps[0].0
    }

    pub fn reversed(&self) -> Loop {
        Loop {
            steps: self.steps.iter().rev().map(|&(a, b)| (b, a)).collect(),
        }
    }

    /// `self` followed by `other`; both must start at the same chart.
    pub fn concat(&self, other: &Loop) -> Result<Loop, BundleError> {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Loop::new(steps)
    }
}

/// Composition of the fiber maps `τ -> ρ(g_αβ⁻¹) τ` along the loop, the
/// latest step applied last.
pub fn holonomy(bundle: &FlatBundle, lp: &Loop) -> Result<AffineTorusMap, BundleError> {
    let sg = bundle.space_group();
    let pg = sg.point_group();
    let mut acc = AffineTorusMap::identity(bundle.dim());
    for &(a, b) in lp.steps() {
        let g = bundle
            .transition(a, b)
            .ok_or(BundleError::UnknownEdge { from: a, to: b })?;
        acc = acc.then(&AffineTorusMap::of_element(sg, pg.inverse(g)));
    }
    Ok(acc)
}

/// One holonomy per non-tree edge of the breadth-first spanning tree
/// rooted at `basepoint` (neighbours visited in ascending order).
pub fn holonomy_generators(
    bundle: &FlatBundle,
    basepoint: usize,
) -> Result<Vec<(Loop, AffineTorusMap)>, BundleError> {
    let base = bundle.base();
    if basepoint >= base.charts() {
        return Err(BundleError::Structure(format!("basepoint {basepoint} is not a chart")));
    }
    let adj = base.neighbours();
    let mut parent: Vec<Option<usize>> = vec![None; base.charts()];
    let mut seen = vec![false; base.charts()];
    seen[basepoint] = true;
    let mut queue = VecDeque::from([basepoint]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    let path_from_base = |mut v: usize| {
        let mut path = vec![v];
        while let Some(p) = parent[v] {
            path.push(p);
            v = p;
        }
        path.reverse();
        path
    };

    let mut undirected: Vec<(usize, usize)> = base
        .edges()
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    undirected.sort_unstable();
    undirected.dedup();

    let mut out = Vec::new();
    for (u, v) in undirected {
        if !seen[u] || parent[v] == Some(u) || parent[u] == Some(v) {
            continue;
        }
        let mut charts = path_from_base(u);
        let mut back = path_from_base(v);
        back.reverse();
        charts.extend(back);
        let lp = Loop::through(&charts)?;
        let h = holonomy(bundle, &lp)?;
        out.push((lp, h));
    }
    Ok(out)
}

/// Common fixed points of the holonomy action on the torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedPointSet {
    Empty,
    /// Finitely many points.
    Points(Vec<TorusPoint>),
    /// Union of translates of a subtorus of dimension `dim` spanned by
    /// `directions`; one representative per component.
    Subtorus {
        dim: usize,
        directions: Vec<RatVector>,
        representatives: Vec<TorusPoint>,
    },
}

impl FixedPointSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, FixedPointSet::Empty)
    }

    /// Sample points of the set (all points when finite).
    pub fn representatives(&self) -> &[TorusPoint] {
        match self {
            FixedPointSet::Empty => &[],
            FixedPointSet::Points(p) => p,
            FixedPointSet::Subtorus { representatives, .. } => representatives,
        }
    }
}

/// Points `v` with `H v ≡ v` for every map, from the stacked congruence
/// `(A_k - I) v ≡ -a_k (mod Z^d)`.
pub fn common_fixed_points(maps: &[AffineTorusMap], d: usize) -> Result<FixedPointSet, BundleError> {
    let id = IntMatrix::identity(d);
    let nontrivial: Vec<&AffineTorusMap> = maps.iter().filter(|m| !m.is_identity()).collect();
    if nontrivial.is_empty() {
        return Ok(FixedPointSet::Subtorus {
            dim: d,
            directions: (0..d)
                .map(|i| {
                    let mut e = vec![0; d];
                    e[i] = 1;
                    RatVector::from_ints(&e)
                })
                .collect(),
            representatives: vec![TorusPoint::new(&RatVector::zeros(d))],
        });
    }
    let mut blocks = Vec::with_capacity(nontrivial.len());
    let mut rhs = Vec::with_capacity(nontrivial.len() * d);
    for m in nontrivial {
        blocks.push(m.linear.sub(&id)?);
        rhs.extend((-&m.shift).into_inner());
    }
    let sol = solve_mod_lattice(&IntMatrix::stack(&blocks)?, &RatVector::new(rhs))?;
    if !sol.solvable {
        return Ok(FixedPointSet::Empty);
    }
    let mut reps: Vec<TorusPoint> = sol.representatives().iter().map(TorusPoint::new).collect();
    reps.sort();
    reps.dedup();
    if sol.free_directions.is_empty() {
        Ok(FixedPointSet::Points(reps))
    } else {
        Ok(FixedPointSet::Subtorus {
            dim: sol.free_directions.len(),
            directions: sol.free_directions,
            representatives: reps,
        })
    }
}

/// Torus points over `basepoint` that extend to a covariantly constant
/// section: the common fixed set of the holonomy generators.
pub fn equilibrium_sections(bundle: &FlatBundle, basepoint: usize) -> Result<FixedPointSet, BundleError> {
    let gens = holonomy_generators(bundle, basepoint)?;
    let maps: Vec<AffineTorusMap> = gens.into_iter().map(|(_, h)| h).collect();
    common_fixed_points(&maps, bundle.dim())
}
