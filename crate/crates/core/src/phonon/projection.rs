use nalgebra::DMatrix;

use super::{DensityMatrix, ElasticTensor, PhononError};

/// Products of listed matrices must land within this distance of the list.
const CLOSURE_TOL: f64 = 1e-9;

fn check_group(rs: &[DMatrix<f64>], d: usize) -> Result<(), PhononError> {
    if rs.is_empty() {
        return Err(PhononError::EmptyGroup);
    }
    if rs.iter().any(|r| r.shape() != (d, d)) {
        return Err(PhononError::Shape(format!("group matrices must be {d}x{d}")));
    }
    for a in rs {
        for b in rs {
            let ab = a * b;
            if !rs.iter().any(|r| (r - &ab).amax() < CLOSURE_TOL) {
                return Err(PhononError::NotClosed);
            }
        }
    }
    Ok(())
}

/// Reynolds average `|G|⁻¹ Σ_R R·C` over a finite matrix group.
pub fn project_invariant(c: &ElasticTensor, rs: &[DMatrix<f64>]) -> Result<ElasticTensor, PhononError> {
    check_group(rs, c.dim())?;
    let mut out = ElasticTensor::zeros(c.dim(), c.is_objective());
    let w = 1.0 / rs.len() as f64;
    for r in rs {
        out.scaled_add(&c.transformed(r), w);
    }
    Ok(out)
}

/// `|G|⁻¹ Σ_R R ρ Rᵀ`.
pub fn project_invariant_density(rho: &DensityMatrix, rs: &[DMatrix<f64>]) -> Result<DensityMatrix, PhononError> {
    check_group(rs, rho.dim())?;
    let d = rho.dim();
    let sum = rs
        .iter()
        .fold(DMatrix::zeros(d, d), |acc, r| acc + r * rho.matrix() * r.transpose());
    let avg = sum / rs.len() as f64;
    DensityMatrix::new((&avg + avg.transpose()) * 0.5)
}

/// Pairs `(p, q)` with `p <= q`, the index set of symmetric `d×d` matrices.
fn sym_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|p| (p..d).map(move |q| (p, q))).collect()
}

/// Dimension of the invariant subspace among tensors with both major and
/// minor symmetries: the numerical rank of the averaging map restricted to
/// that space, with singular values below `threshold` (relative to the
/// largest) treated as zero.
pub fn invariant_objective_dimension(rs: &[DMatrix<f64>], threshold: f64) -> Result<usize, PhononError> {
    let d = rs.first().ok_or(PhononError::EmptyGroup)?.nrows();
    let pairs = sym_pairs(d);
    let mut basis = Vec::new();
    for (x, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[x..] {
            // symmetric tensor e_(pq) ⊗ e_(rs) + e_(rs) ⊗ e_(pq), with each
            // pair symmetrized
            let f = move |a: usize, b: usize, i: usize, j: usize| {
                let pair = |u: usize, v: usize, m: usize, n: usize| {
                    ((u == m && v == n) || (u == n && v == m)) as u8 as f64
                };
                pair(a, i, p, q) * pair(b, j, r, s) + pair(a, i, r, s) * pair(b, j, p, q)
            };
            basis.push(ElasticTensor::from_fn_unchecked(d, true, f));
        }
    }
    let n = d.pow(4);
    let mut images = DMatrix::zeros(n, basis.len());
    for (col, t) in basis.iter().enumerate() {
        let img = project_invariant(t, rs)?;
        for (row, v) in img.data().iter().enumerate() {
            images[(row, col)] = *v;
        }
    }
    let sv = images.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > threshold * top).count())
}
