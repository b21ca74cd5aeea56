use nalgebra::{Cholesky, DMatrix, Dyn};

use super::PhononError;

/// Relative tolerance for the symmetry checks on user-supplied tensors.
const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric positive-definite mass-density matrix `ρ_ij`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, PhononError> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(PhononError::Shape("density must be a non-empty square matrix".into()));
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        if (&matrix - matrix.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(PhononError::NotSymmetric);
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(PhononError::DensityNotPositiveDefinite);
        }
        let cholesky = Cholesky::new(matrix.clone()).ok_or(PhononError::DensityNotPositiveDefinite)?;
        Ok(Self { matrix, cholesky })
    }

    /// `ρ I_d`.
    pub fn scalar(rho: f64, d: usize) -> Result<Self, PhononError> {
        Self::new(DMatrix::identity(d, d) * rho)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular `L` with `ρ = L Lᵀ`.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.cholesky.l()
    }

    pub(crate) fn cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.cholesky
    }
}

/// Elastic tensor `C^{ab}_{ij}` in `d` dimensions.
///
/// Major symmetry `C^{ab}_{ij} = C^{ba}_{ji}` is always enforced. An
/// objective tensor also satisfies the minor symmetries
/// `C^{ab}_{ij} = C^{ib}_{aj} = C^{aj}_{ib}`, so it sees only the
/// symmetrized displacement gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct ElasticTensor {
    dim: usize,
    data: Vec<f64>,
    objective: bool,
}

impl ElasticTensor {
    pub fn new(dim: usize, data: Vec<f64>, objective: bool) -> Result<Self, PhononError> {
        if dim == 0 || data.len() != dim.pow(4) {
            return Err(PhononError::Shape(format!(
                "{} coefficients for a tensor in dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(PhononError::Input("non-finite elastic coefficient".into()));
        }
        let t = Self {
            dim,
            data,
            objective,
        };
        let tol = SYMMETRY_TOL * t.max_abs().max(f64::MIN_POSITIVE);
        for [a, b, i, j] in t.indices() {
            let c = t.get(a, b, i, j);
            if (c - t.get(b, a, j, i)).abs() > tol {
                return Err(PhononError::MajorSymmetry([a, b, i, j]));
            }
            if objective && ((c - t.get(i, b, a, j)).abs() > tol || (c - t.get(a, j, i, b)).abs() > tol) {
                return Err(PhononError::MinorSymmetry([a, b, i, j]));
            }
        }
        Ok(t)
    }

    pub fn zeros(dim: usize, objective: bool) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
            objective,
        }
    }

    /// Builds from `f(a, b, i, j)` without symmetry checks.
    pub(crate) fn from_fn_unchecked(dim: usize, objective: bool, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim, objective);
        for [a, b, i, j] in t.indices() {
            let k = t.offset(a, b, i, j);
            t.data[k] = f(a, b, i, j);
        }
        t
    }

    pub(crate) fn from_data_unchecked(dim: usize, data: Vec<f64>, objective: bool) -> Self {
        Self {
            dim,
            data,
            objective,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_objective(&self) -> bool {
        self.objective
    }

    /// Coefficients in the order `((a·d + b)·d + i)·d + j`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, a: usize, b: usize, i: usize, j: usize) -> usize {
        let d = self.dim;
        ((a * d + b) * d + i) * d + j
    }

    /// `C^{ab}_{ij}`.
    #[inline]
    pub fn get(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        self.data[self.offset(a, b, i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest entrywise difference.
    pub fn max_diff(&self, other: &ElasticTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn indices(&self) -> impl Iterator<Item = [usize; 4]> {
        let d = self.dim;
        (0..d.pow(4)).map(move |k| [k / (d * d * d), (k / (d * d)) % d, (k / d) % d, k % d])
    }

    /// `(R·C)^{ab}_{ij} = R_aα R_bβ R_iι R_jκ C^{αβ}_{ικ}`, one index at a time.
    pub fn transformed(&self, r: &DMatrix<f64>) -> ElasticTensor {
        let d = self.dim;
        let mut cur = self.data.clone();
        let strides = [d * d * d, d * d, d, 1];
        for &stride in &strides {
            let mut next = vec![0.0; cur.len()];
            for (k, out) in next.iter_mut().enumerate() {
                let idx = (k / stride) % d;
                let base = k - idx * stride;
                *out = (0..d).map(|m| r[(idx, m)] * cur[base + m * stride]).sum();
            }
            cur = next;
        }
        Self::from_data_unchecked(d, cur, self.objective)
    }

    pub(crate) fn scaled_add(&mut self, other: &ElasticTensor, s: f64) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += s * y;
        }
    }
}

/// `C = λ δ^a_i δ^b_j + μ (δ_ij δ^{ab} + δ^a_j δ^b_i)` and `ρ_ij = ρ δ_ij`.
///
/// The Lamé moduli are not checked here; see
/// [`IsotropicModuli::validate`](super::IsotropicModuli::validate).
pub fn assemble_isotropic(
    m: &super::IsotropicModuli,
    d: usize,
) -> Result<(DensityMatrix, ElasticTensor), PhononError> {
    if d == 0 {
        return Err(PhononError::Shape("dimension must be positive".into()));
    }
    let delta = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
    let c = ElasticTensor::from_fn_unchecked(d, true, |a, b, i, j| {
        m.lambda * delta(a, i) * delta(b, j) + m.mu * (delta(i, j) * delta(a, b) + delta(a, j) * delta(b, i))
    });
    Ok((DensityMatrix::scalar(m.rho, d)?, c))
}

/// Cubic tensor in the crystal frame: normal entries `C₁₁` on the diagonal
/// and `C₁₂` off it, shear entries `C₄₄`.
pub fn assemble_cubic(m: &super::CubicModuli) -> Result<(DensityMatrix, ElasticTensor), PhononError> {
    let c = ElasticTensor::from_fn_unchecked(3, true, |a, b, i, j| {
        // C^{ab}_{ij} pairs the strain components ε_ai and ε_bj
        if a == i && b == j {
            if a == b {
                m.c11
            } else {
                m.c12
            }
        } else if a != i && ((a == b && i == j) || (a == j && i == b)) {
            m.c44
        } else {
            0.0
        }
    });
    Ok((DensityMatrix::scalar(m.rho, 3)?, c))
}

/// `π_i^a = C^{ab}_{ij} ∂_b φ^j`, with `gradient[(b, j)] = ∂_b φ^j` and the
/// result indexed `[(a, i)]`.
pub fn noether_momenta(c: &ElasticTensor, gradient: &DMatrix<f64>) -> Result<DMatrix<f64>, PhononError> {
    let d = c.dim();
    if gradient.shape() != (d, d) {
        return Err(PhononError::Shape(format!("gradient must be {d}x{d}")));
    }
    Ok(DMatrix::from_fn(d, d, |a, i| {
        let mut s = 0.0;
        for b in 0..d {
            for j in 0..d {
                s += c.get(a, b, i, j) * gradient[(b, j)];
            }
        }
        s
    }))
}

/// `W = ½ C^{ab}_{ij} ∂_a φ^i ∂_b φ^j`.
pub fn elastic_energy(c: &ElasticTensor, gradient: &DMatrix<f64>) -> Result<f64, PhononError> {
    let pi = noether_momenta(c, gradient)?;
    Ok(0.5 * pi.dot(gradient))
}
