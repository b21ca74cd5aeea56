use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;

use super::{
    equilibrium_sections, holonomy, AffineTorusMap, BaseComplex, BundleError, ChartGrid, FlatBundle,
    Loop, Overlap, SectionField,
};
use crate::crystal::SpaceGroup;
use crate::exactalg::IntMatrix;

/// Cover of the circle `[0, 1)` by `n >= 3` arcs arranged in a cycle.
///
/// Chart `k` spans global grid indices `k·m - j ..= (k+1)·m + j` with
/// spacing `1/(n·m)`, so consecutive charts share `2j + 1` samples. Chart
/// `n - 1` meets chart 0 across the wrap, where the parameter of chart 0 is
/// shifted by `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircleCover {
    charts: usize,
    cells: usize,
    overlap: usize,
}

impl CircleCover {
    pub fn new(charts: usize, cells_per_chart: usize, overlap_cells: usize) -> Result<Self, BundleError> {
        if charts < 3 {
            return Err(BundleError::Structure(format!(
                "a circle cover needs at least 3 charts, got {charts}"
            )));
        }
        if overlap_cells == 0 || 2 * overlap_cells >= cells_per_chart {
            return Err(BundleError::Section(format!(
                "overlap of {overlap_cells} cells does not fit charts of {cells_per_chart} cells"
            )));
        }
        Ok(Self {
            charts,
            cells: cells_per_chart,
            overlap: overlap_cells,
        })
    }

    pub fn charts(&self) -> usize {
        self.charts
    }

    pub fn cells_per_chart(&self) -> usize {
        self.cells
    }

    pub fn overlap_cells(&self) -> usize {
        self.overlap
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.charts * self.cells) as f64
    }

    pub fn samples_per_chart(&self) -> usize {
        self.cells + 2 * self.overlap + 1
    }

    /// Edges `k -> k+1 (mod n)`, no triangles.
    pub fn base(&self) -> BaseComplex {
        let edges = (0..self.charts).map(|k| (k, (k + 1) % self.charts)).collect();
        BaseComplex::new(self.charts, edges, Vec::new()).expect("cycle is a valid complex")
    }

    /// `transitions[k]` labels the edge `k -> k+1 (mod n)`.
    pub fn bundle(&self, space_group: SpaceGroup, transitions: Vec<usize>) -> Result<FlatBundle, BundleError> {
        FlatBundle::new(self.base(), space_group, transitions)
    }

    /// The loop `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn loop_around(&self) -> Loop {
        let mut charts: Vec<usize> = (0..self.charts).collect();
        charts.push(0);
        Loop::through(&charts).expect("cycle closes")
    }

    fn first_index(&self, k: usize) -> i64 {
        (k * self.cells) as i64 - self.overlap as i64
    }

    pub fn grids(&self) -> Vec<ChartGrid> {
        let h = self.spacing();
        let samples = self.samples_per_chart();
        (0..self.charts)
            .map(|k| {
                let first = self.first_index(k);
                ChartGrid {
                    start: first as f64 * h,
                    end: (first + samples as i64 - 1) as f64 * h,
                    samples,
                }
            })
            .collect()
    }

    pub fn overlaps(&self) -> Vec<Overlap> {
        (0..self.charts)
            .map(|k| Overlap {
                from: k,
                to: (k + 1) % self.charts,
                from_start: self.cells,
                to_start: 0,
                len: 2 * self.overlap + 1,
            })
            .collect()
    }

    /// Smooth section near an equilibrium, consistent with every transition.
    ///
    /// With `H` the holonomy of [`loop_around`](Self::loop_around) and `v₀`
    /// a common fixed point, chart 0 carries `v₀ + ε f(x)` where
    /// `f(x + 1) = A_H⁻¹ f(x)`; the other charts are obtained by pushing
    /// this lift through the transitions, so the sampled section glues up to
    /// rounding.
    pub fn compatible_section(&self, bundle: &FlatBundle, amplitude: f64) -> Result<SectionField, BundleError> {
        if bundle.base() != &self.base() {
            return Err(BundleError::Structure("bundle is not over this circle cover".into()));
        }
        let d = bundle.dim();
        let fixed = equilibrium_sections(bundle, 0)?;
        let v0 = fixed
            .representatives()
            .first()
            .ok_or(BundleError::NoEquilibrium)?;
        let v0 = DVector::from_vec(v0.coords().to_f64());

        let h_map = holonomy(bundle, &self.loop_around())?;
        let powers = matrix_powers(&h_map.linear);
        let period = powers.len() as f64;

        let sg = bundle.space_group();
        let pg = sg.point_group();
        let mut chart_maps = Vec::with_capacity(self.charts);
        let mut acc = AffineTorusMap::identity(d);
        for k in 0..self.charts {
            chart_maps.push(to_real(&acc));
            let g = bundle
                .transition(k, (k + 1) % self.charts)
                .ok_or(BundleError::UnknownEdge {
                    from: k,
                    to: (k + 1) % self.charts,
                })?;
            acc = acc.then(&AffineTorusMap::of_element(sg, pg.inverse(g)));
        }

        let profile = |x: f64| {
            DVector::from_fn(d, |i, _| {
                let phase = 0.7 * i as f64 + 0.3;
                (TAU * x / period + phase).sin() + 0.5 * (2.0 * TAU * x / period - phase).cos()
            })
        };
        let twisted = |x: f64| {
            powers
                .iter()
                .enumerate()
                .fold(DVector::zeros(d), |s, (j, p)| s + p * profile(x + j as f64))
        };

        let h = self.spacing();
        let values = (0..self.charts)
            .map(|k| {
                let (lin, shift) = &chart_maps[k];
                let first = self.first_index(k);
                (0..self.samples_per_chart())
                    .map(|i| {
                        let x = (first + i as i64) as f64 * h;
                        let u0 = &v0 + twisted(x) * amplitude;
                        lin * u0 + shift
                    })
                    .collect()
            })
            .collect();
        SectionField::new(self.grids(), values, self.overlaps())
    }
}

/// `I, A, A², …` up to the order of `A`, as floats.
fn matrix_powers(a: &IntMatrix) -> Vec<DMatrix<f64>> {
    let id = IntMatrix::identity(a.rows());
    let mut out = vec![to_f64(&id)];
    let mut p = a.clone();
    while p != id {
        out.push(to_f64(&p));
        p = p.mul(a).expect("square");
    }
    out
}

fn to_f64(m: &IntMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].to_f64().unwrap_or(f64::NAN))
}

fn to_real(m: &AffineTorusMap) -> (DMatrix<f64>, DVector<f64>) {
    (to_f64(&m.linear), DVector::from_vec(m.shift.to_f64()))
}
