use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{ExactError, IntMatrix};

/// `U * M * V = S` with `U`, `V` unimodular and `S` diagonal, its nonzero
/// entries forming a divisibility chain `s_1 | s_2 | ... | s_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    rank: usize,
}

impl SnfDecomposition {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The nonzero diagonal entries `s_1, ..., s_r`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.s[(i, i)].clone()).collect()
    }
}

/// Smallest nonzero absolute value in the trailing block starting at
/// `(k, k)`; ties go to the lowest `(row, col)` in row-major order.
fn find_pivot(a: &IntMatrix, k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in k..a.rows() {
        for j in k..a.cols() {
            let x = &a[(i, j)];
            if x.is_zero() {
                continue;
            }
            let ax = x.abs();
            if best.as_ref().is_none_or(|(_, _, b)| ax < *b) {
                best = Some((i, j, ax));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

pub fn smith_normal_form(m: &IntMatrix) -> Result<SnfDecomposition, ExactError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(ExactError::Shape("Smith normal form of an empty matrix".into()));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut rank = 0;

    for k in 0..rows.min(cols) {
        loop {
            let Some((pi, pj)) = find_pivot(&a, k) else {
                return Ok(SnfDecomposition { u, s: a, v, rank });
            };
            a.swap_rows(k, pi);
            u.swap_rows(k, pi);
            a.swap_cols(k, pj);
            v.swap_cols(k, pj);

            let pivot = a[(k, k)].clone();
            let mut clean = true;
            for i in k + 1..rows {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let q = -a[(i, k)].div_floor(&pivot);
                a.add_row_multiple(i, k, &q);
                u.add_row_multiple(i, k, &q);
                clean &= a[(i, k)].is_zero();
            }
            for j in k + 1..cols {
                if a[(k, j)].is_zero() {
                    continue;
                }
                let q = -a[(k, j)].div_floor(&pivot);
                a.add_col_multiple(j, k, &q);
                v.add_col_multiple(j, k, &q);
                clean &= a[(k, j)].is_zero();
            }
            if !clean {
                // a remainder smaller than the pivot survived; re-pivot
                continue;
            }

            let offender = (k + 1..rows).find(|&i| {
                (k + 1..cols).any(|j| !a[(i, j)].is_multiple_of(&pivot))
            });
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row_multiple(k, i, &one);
                    u.add_row_multiple(k, i, &one);
                }
                None => break,
            }
        }
        if a[(k, k)].is_negative() {
            a.negate_row(k);
            u.negate_row(k);
        }
        rank += 1;
    }
    Ok(SnfDecomposition { u, s: a, v, rank })
}
