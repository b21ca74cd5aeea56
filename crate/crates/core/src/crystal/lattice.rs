use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::CrystalError;
use crate::exactalg::IntMatrix;

/// Condition number above which the basis is refused for Cartesian work.
pub const MAX_BASIS_CONDITION: f64 = 1e8;

/// Translation lattice: a floating Cartesian basis (columns are the
/// generators) and the exact Gram matrix used for every exact check.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
    gram: Vec<BigRational>,
}

impl Lattice {
    pub fn new(basis: DMatrix<f64>, gram: Vec<Vec<BigRational>>) -> Result<Self, CrystalError> {
        let d = basis.nrows();
        if d == 0 || basis.ncols() != d {
            return Err(CrystalError::Shape(format!(
                "basis must be a nonempty square matrix, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        if gram.len() != d || gram.iter().any(|r| r.len() != d) {
            return Err(CrystalError::Shape(format!("gram matrix must be {d}x{d}")));
        }
        for i in 0..d {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(CrystalError::GramNotSymmetric { row: i, col: j });
                }
            }
        }
        for k in 1..=d {
            let minor: Vec<Vec<BigRational>> =
                gram[..k].iter().map(|r| r[..k].to_vec()).collect();
            if !rational_determinant(minor).is_positive() {
                return Err(CrystalError::NotPositiveDefinite { minor: k });
            }
        }

        if basis.iter().any(|x| !x.is_finite()) {
            return Err(CrystalError::Shape("basis has non-finite entries".into()));
        }
        let col_norms: f64 = basis.column_iter().map(|c| c.norm()).product();
        if col_norms == 0.0 || basis.determinant().abs() <= 1e-12 * col_norms {
            return Err(CrystalError::SingularBasis);
        }
        let btb = basis.transpose() * &basis;
        let scale = gram
            .iter()
            .flatten()
            .map(|x| x.to_f64().unwrap_or(f64::INFINITY).abs())
            .fold(1.0, f64::max);
        for i in 0..d {
            for j in 0..d {
                let g = gram[i][j].to_f64().unwrap_or(f64::NAN);
                if !((g - btb[(i, j)]).abs() <= 1e-9 * scale) {
                    return Err(CrystalError::GramMismatch { row: i, col: j });
                }
            }
        }

        Ok(Self {
            basis,
            gram: gram.into_iter().flatten().collect(),
        })
    }

    /// Orthonormal basis in `d` dimensions (`G = I`).
    pub fn cubic(d: usize) -> Self {
        let gram = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| BigRational::from_integer(BigInt::from((i == j) as i64)))
                    .collect()
            })
            .collect();
        Self::new(DMatrix::identity(d, d), gram).expect("identity lattice is valid")
    }

    /// Two-dimensional hexagonal lattice with unit generators at 120°.
    pub fn hexagonal_2d() -> Self {
        let s = 3f64.sqrt() / 2.0;
        let basis = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.0, s]);
        let half = BigRational::new((-1).into(), 2.into());
        let one = BigRational::from_integer(1.into());
        Self::new(basis, vec![vec![one.clone(), half.clone()], vec![half, one]])
            .expect("hexagonal lattice is valid")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn gram(&self, i: usize, j: usize) -> &BigRational {
        &self.gram[i * self.dim() + j]
    }

    pub fn gram_rows(&self) -> Vec<Vec<BigRational>> {
        self.gram.chunks(self.dim()).map(<[_]>::to_vec).collect()
    }

    /// Exact test of `Aᵀ G A = G`.
    pub fn preserves_gram(&self, a: &IntMatrix) -> bool {
        let d = self.dim();
        if a.rows() != d || a.cols() != d {
            return false;
        }
        // (G A)_{kj}
        let mut ga = vec![BigRational::zero(); d * d];
        for k in 0..d {
            for j in 0..d {
                ga[k * d + j] = (0..d).fold(BigRational::zero(), |acc, l| {
                    acc + self.gram(k, l) * BigRational::from_integer(a[(l, j)].clone())
                });
            }
        }
        (0..d).all(|i| {
            (0..d).all(|j| {
                let v = (0..d).fold(BigRational::zero(), |acc, k| {
                    acc + BigRational::from_integer(a[(k, i)].clone()) * &ga[k * d + j]
                });
                &v == self.gram(i, j)
            })
        })
    }

    /// 2-norm condition number of the basis.
    pub fn condition_number(&self) -> f64 {
        let sv = self.basis.clone().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// `B A B⁻¹` for a lattice-coordinate integer matrix `A`.
    pub fn to_cartesian(&self, a: &IntMatrix) -> Result<DMatrix<f64>, CrystalError> {
        let cond = self.condition_number();
        if cond > MAX_BASIS_CONDITION {
            return Err(CrystalError::IllConditioned { condition: cond });
        }
        let d = self.dim();
        let inv = self
            .basis
            .clone()
            .try_inverse()
            .ok_or(CrystalError::SingularBasis)?;
        let af = DMatrix::from_fn(d, d, |i, j| a[(i, j)].to_f64().unwrap_or(f64::NAN));
        Ok(&self.basis * af * inv)
    }
}

/// Exact determinant by Gaussian elimination over the rationals.
pub(crate) fn rational_determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::from_integer(1.into());
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let pivot = m[k][k].clone();
        det *= &pivot;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &pivot;
            for j in k..n {
                let v = &f * &m[k][j];
                m[i][j] -= v;
            }
        }
    }
    det
}
