use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::{DensityMatrix, ElasticTensor, PhononError};

/// Eigenvalues closer than this (relative to the largest) share an
/// eigenspace when polarizations are orthonormalized.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Eigenvalues below `-INSTABILITY_TOL · scale` mark the result unstable.
pub const INSTABILITY_TOL: f64 = 1e-9;

/// `𝒞_ij(k) = C^{ab}_{ij} k_a k_b`.
pub fn christoffel(c: &ElasticTensor, k: &[f64]) -> Result<DMatrix<f64>, PhononError> {
    let d = c.dim();
    if k.len() != d {
        return Err(PhononError::Shape(format!(
            "wave vector has {} components, tensor dimension is {d}",
            k.len()
        )));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| {
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += c.get(a, b, i, j) * k[a] * k[b];
            }
        }
        s
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionResult {
    pub k: Vec<f64>,
    /// Generalized eigenvalues `ω²`, ascending; may be negative.
    pub omega_squared: Vec<f64>,
    /// `sqrt(max(ω², 0))`, ascending.
    pub omegas: Vec<f64>,
    /// `ρ`-orthonormal amplitudes, one per frequency.
    pub polarizations: Vec<DVector<f64>>,
    /// Some `ω²` lies below `-INSTABILITY_TOL · scale`.
    pub unstable: bool,
}

/// Solves `𝒞(k) α = ω² ρ α` through `ρ = L Lᵀ` and the symmetric problem
/// for `L⁻¹ 𝒞 L⁻ᵀ`.
///
/// Inside a degenerate eigenspace the basis is fixed by projecting
/// `e_0, e_1, …` onto it and orthonormalizing in that order, so repeated
/// calls give identical polarizations.
pub fn dispersion(rho: &DensityMatrix, c: &ElasticTensor, k: &[f64]) -> Result<DispersionResult, PhononError> {
    let d = c.dim();
    if rho.dim() != d {
        return Err(PhononError::Shape(format!(
            "density is {}x{}, tensor dimension is {d}",
            rho.dim(),
            rho.dim()
        )));
    }
    let cm = christoffel(c, k)?;
    let chol = rho.cholesky();
    let l = chol.l();
    // M = L⁻¹ 𝒞 L⁻ᵀ
    let left = l
        .solve_lower_triangular(&cm)
        .ok_or(PhononError::DensityNotPositiveDefinite)?;
    let m = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(PhononError::DensityNotPositiveDefinite)?;
    let m = (&m + m.transpose()) * 0.5;

    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let scale = values.iter().fold(0.0_f64, |s, v| s.max(v.abs()));

    let mut ys: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end] - values[start] <= DEGENERACY_TOL * scale {
            end += 1;
        }
        let span: Vec<DVector<f64>> = order[start..end]
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect();
        ys.extend(canonical_basis(&span, d));
        start = end;
    }

    let lt = l.transpose();
    let polarizations = ys
        .iter()
        .map(|y| lt.solve_upper_triangular(y).expect("cholesky factor is nonsingular"))
        .collect();
    Ok(DispersionResult {
        k: k.to_vec(),
        omegas: values.iter().map(|&w| w.max(0.0).sqrt()).collect(),
        unstable: values.iter().any(|&w| w < -INSTABILITY_TOL * scale.max(m.amax())),
        omega_squared: values,
        polarizations,
    })
}

/// Orthonormal basis of `span` obtained from the projections of the unit
/// vectors, taken in index order.
fn canonical_basis(span: &[DVector<f64>], d: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(span.len());
    for i in 0..d {
        if basis.len() == span.len() {
            break;
        }
        let mut v = DVector::zeros(d);
        for s in span {
            v += s * s[i];
        }
        for b in &basis {
            let p = b.dot(&v);
            v -= b * p;
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v / n);
        }
    }
    // Gram-Schmidt can only fall short through rounding; fall back to the
    // solver's own vectors for what remains.
    for s in span {
        if basis.len() == span.len() {
            break;
        }
        let mut v = s.clone();
        for b in &basis {
            let p = b.dot(&v);
            v -= b * p;
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v / n);
        }
    }
    basis
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionRow {
    /// Arc length along the path in k-space.
    pub t: f64,
    pub k: Vec<f64>,
    pub omegas: Vec<f64>,
    pub unstable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionTable {
    pub dim: usize,
    pub rows: Vec<DispersionRow>,
}

impl DispersionTable {
    pub fn any_unstable(&self) -> bool {
        self.rows.iter().any(|r| r.unstable)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((0..self.dim).map(|i| match i {
            0..=2 => format!("k{}", ["x", "y", "z"][i]),
            _ => format!("k{}", i + 1),
        }));
        h.extend((1..=self.dim).map(|i| format!("omega{i}")));
        h
    }

    /// `t,kx,ky,kz,omega1,…` with shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for r in &self.rows {
            let mut rec = vec![r.t.to_string()];
            rec.extend(r.k.iter().map(f64::to_string));
            rec.extend(r.omegas.iter().map(f64::to_string));
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Dispersion along the piecewise-linear path through `waypoints`, with
/// `samples` intervals per segment and each waypoint listed once.
pub fn kpath_sweep(
    rho: &DensityMatrix,
    c: &ElasticTensor,
    waypoints: &[Vec<f64>],
    samples: usize,
) -> Result<DispersionTable, PhononError> {
    let d = c.dim();
    if waypoints.is_empty() {
        return Err(PhononError::Input("k-path needs at least one waypoint".into()));
    }
    if samples == 0 {
        return Err(PhononError::Input("samples per segment must be positive".into()));
    }
    if let Some(w) = waypoints.iter().find(|w| w.len() != d) {
        return Err(PhononError::Shape(format!(
            "waypoint has {} components, tensor dimension is {d}",
            w.len()
        )));
    }
    let mut points: Vec<(f64, Vec<f64>)> = vec![(0.0, waypoints[0].clone())];
    let mut t0 = 0.0;
    for seg in waypoints.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        let len = a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt();
        for s in 1..=samples {
            let f = s as f64 / samples as f64;
            let k = a.iter().zip(b).map(|(x, y)| x + f * (y - x)).collect();
            points.push((t0 + f * len, k));
        }
        t0 += len;
    }
    let rows = points
        .par_iter()
        .map(|(t, k)| {
            let r = dispersion(rho, c, k)?;
            Ok(DispersionRow {
                t: *t,
                k: r.k,
                omegas: r.omegas,
                unstable: r.unstable,
            })
        })
        .collect::<Result<Vec<_>, PhononError>>()?;
    Ok(DispersionTable { dim: d, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonon::{assemble_cubic, assemble_isotropic, CubicModuli, IsotropicModuli};

    fn iso() -> (DensityMatrix, ElasticTensor) {
        assemble_isotropic(
            &IsotropicModuli {
                lambda: 0.4,
                mu: 0.5,
                rho: 2.0,
            },
            3,
        )
        .unwrap()
    }

    #[test]
    fn zero_wave_vector() {
        let (rho, c) = iso();
        assert_eq!(christoffel(&c, &[0.0; 3]).unwrap().amax(), 0.0);
        let r = dispersion(&rho, &c, &[0.0; 3]).unwrap();
        assert_eq!(r.omegas, vec![0.0; 3]);
        assert!(!r.unstable);
        assert_eq!(r.polarizations.len(), 3);
    }

    #[test]
    fn isotropic_christoffel_closed_form() {
        let (lambda, mu) = (0.4, 0.5);
        let (_, c) = iso();
        let k = [0.3, -0.8, 1.1];
        let k2: f64 = k.iter().map(|x| x * x).sum();
        let want = DMatrix::from_fn(3, 3, |i, j| {
            (if i == j { mu * k2 } else { 0.0 }) + (lambda + mu) * k[i] * k[j]
        });
        assert!((christoffel(&c, &k).unwrap() - want).amax() < 1e-14);
    }

    #[test]
    fn isotropic_branches() {
        let (rho, c) = iso();
        let k = [0.6, 0.0, -0.8];
        let r = dispersion(&rho, &c, &k).unwrap();
        let t = (0.5f64 / 2.0).sqrt();
        let l = (1.4f64 / 2.0).sqrt();
        for (got, want) in r.omegas.iter().zip([t, t, l]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn polarizations_are_density_orthonormal() {
        let rho = DensityMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0],
        ))
        .unwrap();
        let (_, c) = iso();
        let r = dispersion(&rho, &c, &[0.2, 0.5, -0.4]).unwrap();
        let cm = christoffel(&c, &r.k).unwrap();
        for (a, pa) in r.polarizations.iter().enumerate() {
            let resid = &cm * pa - rho.matrix() * pa * r.omega_squared[a];
            assert!(resid.amax() < 1e-12);
            for (b, pb) in r.polarizations.iter().enumerate() {
                let g = pa.dot(&(rho.matrix() * pb));
                assert!((g - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_polarizations_are_deterministic() {
        let (rho, c) = iso();
        let k = [0.0, 0.0, 1.0];
        let a = dispersion(&rho, &c, &k).unwrap();
        let b = dispersion(&rho, &c, &k).unwrap();
        assert_eq!(a, b);
        // transverse pair along z projects onto x then y
        let s = 1.0 / 2f64.sqrt();
        assert!((&a.polarizations[0] - DVector::from_vec(vec![s, 0.0, 0.0])).amax() < 1e-12);
        assert!((&a.polarizations[1] - DVector::from_vec(vec![0.0, s, 0.0])).amax() < 1e-12);
    }

    #[test]
    fn negative_eigenvalues_flag_instability() {
        let m = CubicModuli {
            c11: 1.0,
            c12: 0.5,
            c44: -0.3,
            rho: 1.0,
        };
        let (rho, c) = assemble_cubic(&m).unwrap();
        let r = dispersion(&rho, &c, &[1.0, 0.0, 0.0]).unwrap();
        assert!(r.unstable);
        assert_eq!(r.omegas[0], 0.0);
        assert!((r.omega_squared[0] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn repeated_waypoint_gives_constant_rows() {
        let (rho, c) = iso();
        let k = vec![0.1, 0.2, 0.3];
        let table = kpath_sweep(&rho, &c, &[k.clone(), k], 4).unwrap();
        assert_eq!(table.rows.len(), 5);
        assert!(table.rows.iter().all(|r| r == &table.rows[0]));
    }

    #[test]
    fn path_parameter_is_arc_length() {
        let (rho, c) = iso();
        let table = kpath_sweep(
            &rho,
            &c,
            &[vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]],
            4,
        )
        .unwrap();
        assert_eq!(table.rows.len(), 9);
        assert_eq!(table.rows[4].t, 1.0);
        assert_eq!(table.rows[8].t, 2.0);
        assert_eq!(table.rows[6].k, vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn csv_layout() {
        let (rho, c) = iso();
        let table = kpath_sweep(&rho, &c, &[vec![0.0; 3], vec![0.5, 0.0, 0.0]], 1).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,kx,ky,kz,omega1,omega2,omega3"));
        assert_eq!(lines.next(), Some("0,0,0,0,0,0,0"));
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn bad_paths_are_rejected() {
        let (rho, c) = iso();
        assert!(kpath_sweep(&rho, &c, &[], 3).is_err());
        assert!(kpath_sweep(&rho, &c, &[vec![0.0; 3]], 0).is_err());
        assert!(kpath_sweep(&rho, &c, &[vec![0.0; 2]], 3).is_err());
    }
}
