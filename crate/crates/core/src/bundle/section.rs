use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;

use super::{BundleError, FlatBundle};
use crate::exactalg::RatVector;

/// Lattice vectors are recovered by rounding; a coordinate whose distance to
/// the nearest integer reaches this band is reported as ambiguous.
pub const WINDING_AMBIGUITY: f64 = 0.4;

/// Uniform 1-D parameter grid of a chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartGrid {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl ChartGrid {
    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.samples - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.spacing()
    }
}

/// Sample correspondence on the overlap `from -> to`: sample
/// `from_start + k` of chart `from` sits at the same base point as sample
/// `to_start + k` of chart `to`, for `k < len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub from: usize,
    pub to: usize,
    pub from_start: usize,
    pub to_start: usize,
    pub len: usize,
}

/// Sampled local lifts `ũ_α` of a torus-valued section, in lattice
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionField {
    grids: Vec<ChartGrid>,
    values: Vec<Vec<DVector<f64>>>,
    overlaps: Vec<Overlap>,
}

impl SectionField {
    pub fn new(
        grids: Vec<ChartGrid>,
        values: Vec<Vec<DVector<f64>>>,
        overlaps: Vec<Overlap>,
    ) -> Result<Self, BundleError> {
        validate_layout(&grids, &values, &overlaps)?;
        Ok(Self {
            grids,
            values,
            overlaps,
        })
    }

    pub fn grids(&self) -> &[ChartGrid] {
        &self.grids
    }

    pub fn values(&self) -> &[Vec<DVector<f64>>] {
        &self.values
    }

    pub fn overlaps(&self) -> &[Overlap] {
        &self.overlaps
    }

    /// Applies `f(chart, sample, value)` to every sample.
    pub fn map_values<F>(&self, mut f: F) -> SectionField
    where
        F: FnMut(usize, usize, &DVector<f64>) -> DVector<f64>,
    {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(c, vals)| vals.iter().enumerate().map(|(i, v)| f(c, i, v)).collect())
            .collect();
        SectionField {
            grids: self.grids.clone(),
            values,
            overlaps: self.overlaps.clone(),
        }
    }
}

fn validate_layout(
    grids: &[ChartGrid],
    values: &[Vec<DVector<f64>>],
    overlaps: &[Overlap],
) -> Result<(), BundleError> {
    if grids.len() != values.len() {
        return Err(BundleError::Section(format!(
            "{} grids but {} value arrays",
            grids.len(),
            values.len()
        )));
    }
    let dim = values.iter().flatten().next().map(|v| v.len());
    for (c, (g, vals)) in grids.iter().zip(values).enumerate() {
        if g.samples < 2 || !(g.end > g.start) {
            return Err(BundleError::Section(format!("chart {c} has a degenerate grid")));
        }
        if vals.len() != g.samples {
            return Err(BundleError::Section(format!(
                "chart {c} has {} values for {} samples",
                vals.len(),
                g.samples
            )));
        }
        if vals.iter().any(|v| Some(v.len()) != dim) {
            return Err(BundleError::Section(format!("chart {c} mixes vector dimensions")));
        }
    }
    for o in overlaps {
        let (Some(ga), Some(gb)) = (grids.get(o.from), grids.get(o.to)) else {
            return Err(BundleError::Section(format!(
                "overlap {}->{} references a missing chart",
                o.from, o.to
            )));
        };
        if o.len == 0 || o.from_start + o.len > ga.samples || o.to_start + o.len > gb.samples {
            return Err(BundleError::Section(format!(
                "overlap {}->{} runs past a chart",
                o.from, o.to
            )));
        }
        let (ha, hb) = (ga.spacing(), gb.spacing());
        if (ha - hb).abs() > 1e-12 * ha.abs().max(hb.abs()) {
            return Err(BundleError::Section(format!(
                "overlap {}->{} joins grids of different spacing",
                o.from, o.to
            )));
        }
    }
    Ok(())
}

/// Gluing diagnostics on one overlap.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeGluing {
    pub from: usize,
    pub to: usize,
    /// Transition element `g_{from,to}`.
    pub element: usize,
    /// Affine shift `a(g⁻¹)` entering the lift relation.
    pub shift: RatVector,
    /// Recovered `λ_αβ`, when constant across the overlap.
    pub lattice_vector: Option<Vec<i64>>,
    pub max_residual: f64,
    pub ambiguous: bool,
    pub winding_inconsistent: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionGluingReport {
    pub edges: Vec<EdgeGluing>,
}

impl SectionGluingReport {
    pub fn passed(&self) -> bool {
        self.edges.iter().all(|e| e.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.edges.iter().map(|e| e.max_residual).fold(0.0, f64::max)
    }
}

struct EdgeData {
    element: usize,
    inv_linear: DMatrix<f64>,
    inv_shift: RatVector,
}

fn edge_data(bundle: &FlatBundle, o: &Overlap) -> Result<EdgeData, BundleError> {
    let sg = bundle.space_group();
    let g = bundle.transition(o.from, o.to).ok_or(BundleError::UnknownEdge {
        from: o.from,
        to: o.to,
    })?;
    let inv = sg.point_group().inverse(g);
    let a = sg.linear(inv);
    let d = bundle.dim();
    Ok(EdgeData {
        element: g,
        inv_linear: DMatrix::from_fn(d, d, |i, j| a[(i, j)].to_f64().unwrap_or(f64::NAN)),
        inv_shift: sg.translation(inv).clone(),
    })
}

fn check_dims(bundle: &FlatBundle, grids: usize, values: &[Vec<DVector<f64>>]) -> Result<(), BundleError> {
    if grids != bundle.base().charts() {
        return Err(BundleError::Section(format!(
            "field has {grids} charts, the bundle has {}",
            bundle.base().charts()
        )));
    }
    if values.iter().flatten().any(|v| v.len() != bundle.dim()) {
        return Err(BundleError::Section("sample dimension differs from the torus".into()));
    }
    Ok(())
}

/// Checks `ũ_β = A⁻¹ ũ_α + a(g⁻¹) + λ_αβ` on every overlap sample pair and
/// recovers `λ_αβ` by rounding.
pub fn check_section_gluing(
    bundle: &FlatBundle,
    section: &SectionField,
    tol: f64,
) -> Result<SectionGluingReport, BundleError> {
    check_dims(bundle, section.grids.len(), &section.values)?;
    let mut edges = Vec::with_capacity(section.overlaps.len());
    for o in &section.overlaps {
        let ed = edge_data(bundle, o)?;
        let shift = DVector::from_vec(ed.inv_shift.to_f64());
        let mut lambda: Option<DVector<f64>> = None;
        let mut max_residual: f64 = 0.0;
        let mut ambiguous = false;
        let mut winding_inconsistent = false;
        for k in 0..o.len {
            let ua = &section.values[o.from][o.from_start + k];
            let ub = &section.values[o.to][o.to_start + k];
            let r = ub - (&ed.inv_linear * ua + &shift);
            let rounded = r.map(f64::round);
            let dist = (&r - &rounded).amax();
            ambiguous |= dist >= WINDING_AMBIGUITY;
            max_residual = max_residual.max(dist);
            match &lambda {
                None => lambda = Some(rounded),
                Some(l) if *l != rounded => winding_inconsistent = true,
                _ => {}
            }
        }
        let lattice_vector = if winding_inconsistent || ambiguous {
            None
        } else {
            lambda.map(|l| l.iter().map(|&x| x as i64).collect())
        };
        edges.push(EdgeGluing {
            from: o.from,
            to: o.to,
            element: ed.element,
            shift: ed.inv_shift,
            lattice_vector,
            max_residual,
            ambiguous,
            winding_inconsistent,
            passed: !ambiguous && !winding_inconsistent && max_residual < tol,
        });
    }
    Ok(SectionGluingReport { edges })
}

/// Finite-difference derivatives of the local lifts with respect to the
/// chart parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariantDifferentialField {
    grids: Vec<ChartGrid>,
    derivatives: Vec<Vec<DVector<f64>>>,
    overlaps: Vec<Overlap>,
}

impl CovariantDifferentialField {
    pub fn grids(&self) -> &[ChartGrid] {
        &self.grids
    }

    pub fn derivatives(&self) -> &[Vec<DVector<f64>>] {
        &self.derivatives
    }

    pub fn overlaps(&self) -> &[Overlap] {
        &self.overlaps
    }

    /// True when sample `i` of chart `c` uses a one-sided stencil.
    pub fn is_boundary(&self, c: usize, i: usize) -> bool {
        i == 0 || i + 1 == self.grids[c].samples
    }
}

/// Central differences in the interior, second-order one-sided differences
/// at both chart ends.
pub fn covariant_differential(section: &SectionField) -> Result<CovariantDifferentialField, BundleError> {
    let mut derivatives = Vec::with_capacity(section.grids.len());
    for (c, (g, u)) in section.grids.iter().zip(&section.values).enumerate() {
        let n = g.samples;
        if n < 3 {
            return Err(BundleError::TooFewSamples { chart: c, samples: n });
        }
        let h = g.spacing();
        let mut du = Vec::with_capacity(n);
        du.push((&u[1] * 4.0 - &u[0] * 3.0 - &u[2]) / (2.0 * h));
        for i in 1..n - 1 {
            du.push((&u[i + 1] - &u[i - 1]) / (2.0 * h));
        }
        du.push((&u[n - 1] * 3.0 - &u[n - 2] * 4.0 + &u[n - 3]) / (2.0 * h));
        derivatives.push(du);
    }
    Ok(CovariantDifferentialField {
        grids: section.grids.clone(),
        derivatives,
        overlaps: section.overlaps.clone(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeDerivativeGluing {
    pub from: usize,
    pub to: usize,
    pub element: usize,
    pub max_residual: f64,
    /// Largest residual over pairs where both sides use central differences.
    pub interior_residual: f64,
    /// Largest residual over pairs involving a one-sided stencil; this is the
    /// finite-difference truncation allowance.
    pub boundary_residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeGluingReport {
    pub edges: Vec<EdgeDerivativeGluing>,
}

impl DerivativeGluingReport {
    pub fn passed(&self) -> bool {
        self.edges.iter().all(|e| e.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.edges.iter().map(|e| e.max_residual).fold(0.0, f64::max)
    }

    pub fn interior_residual(&self) -> f64 {
        self.edges.iter().map(|e| e.interior_residual).fold(0.0, f64::max)
    }
}

/// Checks `dũ_β = A⁻¹ dũ_α` on overlaps. Only linear parts enter; the
/// affine shifts of the transitions play no role here.
pub fn check_derivative_gluing(
    bundle: &FlatBundle,
    field: &CovariantDifferentialField,
    tol: f64,
) -> Result<DerivativeGluingReport, BundleError> {
    check_dims(bundle, field.grids.len(), &field.derivatives)?;
    let mut edges = Vec::with_capacity(field.overlaps.len());
    for o in &field.overlaps {
        let ed = edge_data(bundle, o)?;
        let mut interior: f64 = 0.0;
        let mut boundary: f64 = 0.0;
        for k in 0..o.len {
            let (ia, ib) = (o.from_start + k, o.to_start + k);
            let da = &field.derivatives[o.from][ia];
            let db = &field.derivatives[o.to][ib];
            let r = (db - &ed.inv_linear * da).amax();
            if field.is_boundary(o.from, ia) || field.is_boundary(o.to, ib) {
                boundary = boundary.max(r);
            } else {
                interior = interior.max(r);
            }
        }
        let max_residual = interior.max(boundary);
        edges.push(EdgeDerivativeGluing {
            from: o.from,
            to: o.to,
            element: ed.element,
            max_residual,
            interior_residual: interior,
            boundary_residual: boundary,
            passed: max_residual < tol,
        });
    }
    Ok(DerivativeGluingReport { edges })
}
