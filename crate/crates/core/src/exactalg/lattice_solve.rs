use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{smith_normal_form, ExactError, IntMatrix, RatVector};

/// Upper bound on the number of enumerated discrete cosets.
pub const MAX_DISCRETE_OFFSETS: usize = 1 << 20;

/// Real solutions `t` of `M t ≡ b (mod Z^m)`.
///
/// When solvable the full solution set is
/// `particular + offset + span(free_directions) + Z^n` for some entry
/// `offset` of `discrete_offsets`; distinct offsets give distinct cosets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModLatticeSolution {
    pub solvable: bool,
    pub particular: Option<RatVector>,
    pub free_directions: Vec<RatVector>,
    pub discrete_offsets: Vec<RatVector>,
}

impl ModLatticeSolution {
    fn unsolvable() -> Self {
        Self {
            solvable: false,
            particular: None,
            free_directions: Vec::new(),
            discrete_offsets: Vec::new(),
        }
    }

    /// Every coset representative `particular + offset`.
    pub fn representatives(&self) -> Vec<RatVector> {
        match &self.particular {
            Some(p) => self.discrete_offsets.iter().map(|o| p + o).collect(),
            None => Vec::new(),
        }
    }
}

/// Solves `M t ≡ b (mod Z^m)` for real `t` via the Smith form of `M`.
///
/// With `U M V = S` and `t = V t'`, the system becomes `S t' ≡ U b`. Rows past
/// the rank need `(U b)_i ∈ Z`; rank rows give `t'_i = (U b)_i / s_i` up to
/// multiples of `1 / s_i`; the remaining `t'` coordinates are free.
pub fn solve_mod_lattice(m: &IntMatrix, b: &RatVector) -> Result<ModLatticeSolution, ExactError> {
    if b.dim() != m.rows() {
        return Err(ExactError::Shape(format!(
            "right-hand side has length {} but the matrix has {} rows",
            b.dim(),
            m.rows()
        )));
    }
    let n = m.cols();
    if n == 0 {
        return Err(ExactError::Shape("system without unknowns".into()));
    }
    if m.rows() == 0 {
        return Ok(ModLatticeSolution {
            solvable: true,
            particular: Some(RatVector::zeros(n)),
            free_directions: unit_columns(&IntMatrix::identity(n), 0),
            discrete_offsets: vec![RatVector::zeros(n)],
        });
    }

    let snf = smith_normal_form(m)?;
    let r = snf.rank();
    let ub = snf.u.mul_rat(b.as_slice())?;
    if ub[r..].iter().any(|x| !x.is_integer()) {
        return Ok(ModLatticeSolution::unsolvable());
    }

    let factors = snf.invariant_factors();
    let mut t_prime = vec![BigRational::zero(); n];
    for i in 0..r {
        t_prime[i] = &ub[i] / BigRational::from_integer(factors[i].clone());
    }
    let particular = RatVector::new(snf.v.mul_rat(&t_prime)?);

    let total: Option<usize> = factors
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.to_usize()?));
    let total = match total {
        Some(t) if t <= MAX_DISCRETE_OFFSETS => t,
        _ => return Err(ExactError::TooManyCosets),
    };
    let mut discrete_offsets = Vec::with_capacity(total);
    let mut counter = vec![0usize; r];
    for _ in 0..total {
        let mut w = vec![BigRational::zero(); n];
        for i in 0..r {
            w[i] = BigRational::new(BigInt::from(counter[i]), factors[i].clone());
        }
        discrete_offsets.push(RatVector::new(snf.v.mul_rat(&w)?));
        // odometer over k_i in 0..s_i, first index fastest
        for i in 0..r {
            counter[i] += 1;
            if BigInt::from(counter[i]) < factors[i] {
                break;
            }
            counter[i] = 0;
        }
    }

    Ok(ModLatticeSolution {
        solvable: true,
        particular: Some(particular),
        free_directions: unit_columns(&snf.v, r),
        discrete_offsets,
    })
}

fn unit_columns(v: &IntMatrix, from: usize) -> Vec<RatVector> {
    (from..v.cols())
        .map(|j| {
            (0..v.rows())
                .map(|i| BigRational::from_integer(v[(i, j)].clone()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::rat;

    fn residual_is_integral(m: &IntMatrix, t: &RatVector, b: &RatVector) -> bool {
        let mt = RatVector::new(m.mul_rat(t.as_slice()).unwrap());
        (&mt - b).is_integral()
    }

    #[test]
    fn identity_system() {
        let m = IntMatrix::identity(2);
        let b = RatVector::from_fracs(&[(1, 3), (1, 2)]);
        let sol = solve_mod_lattice(&m, &b).unwrap();
        assert!(sol.solvable);
        assert_eq!(sol.particular.as_ref().unwrap(), &b);
        assert!(sol.free_directions.is_empty());
        assert_eq!(sol.discrete_offsets, vec![RatVector::zeros(2)]);
    }

    #[test]
    fn zero_row_forces_contradiction() {
        let m = IntMatrix::diagonal(&[2, 0]);
        let b = RatVector::from_fracs(&[(0, 1), (1, 2)]);
        let sol = solve_mod_lattice(&m, &b).unwrap();
        assert!(!sol.solvable);
        assert!(sol.particular.is_none());
    }

    #[test]
    fn partial_rank_with_free_direction() {
        let m = IntMatrix::diagonal(&[2, 2, 0]);
        let b = RatVector::from_fracs(&[(1, 2), (0, 1), (0, 1)]);
        let sol = solve_mod_lattice(&m, &b).unwrap();
        assert!(sol.solvable);
        let p = sol.particular.clone().unwrap();
        assert_eq!(p, RatVector::from_fracs(&[(1, 4), (0, 1), (0, 1)]));
        assert!(residual_is_integral(&m, &p, &b));
        assert_eq!(sol.free_directions, vec![RatVector::from_ints(&[0, 0, 1])]);
        for f in &sol.free_directions {
            assert!(RatVector::new(m.mul_rat(f.as_slice()).unwrap()).is_zero());
        }
        // 2 * 2 cosets modulo Z^3 plus the free axis
        assert_eq!(sol.discrete_offsets.len(), 4);
        for rep in sol.representatives() {
            assert!(residual_is_integral(&m, &rep, &b));
        }
    }

    #[test]
    fn mismatched_rhs_is_rejected() {
        let m = IntMatrix::identity(2);
        assert!(solve_mod_lattice(&m, &RatVector::zeros(3)).is_err());
    }

    #[test]
    fn reflection_fixed_points() {
        // -2 v ≡ 0 has solutions {0, 1/2}
        let m = IntMatrix::from_rows(&[[-2]]).unwrap();
        let sol = solve_mod_lattice(&m, &RatVector::zeros(1)).unwrap();
        let mut reps: Vec<_> = sol.representatives().iter().map(|r| r.reduce_mod_one()).collect();
        reps.sort();
        assert_eq!(reps, vec![RatVector::zeros(1), RatVector::new(vec![rat(1, 2)])]);
    }
}
