use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Exact rational vector. `BigRational` keeps every entry reduced with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RatVector(Vec<BigRational>);

impl RatVector {
    pub fn new(entries: Vec<BigRational>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![BigRational::zero(); dim])
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Self(entries.iter().map(|&x| rat(x, 1)).collect())
    }

    /// Builds from `(numerator, denominator)` pairs.
    pub fn from_fracs(entries: &[(i64, i64)]) -> Self {
        Self(entries.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    pub fn from_big_ints(entries: &[BigInt]) -> Self {
        Self(entries.iter().cloned().map(BigRational::from_integer).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<BigRational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigRational> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    /// Integer entries, or `None` if any entry has a nontrivial denominator.
    pub fn to_integers(&self) -> Option<Vec<BigInt>> {
        self.0
            .iter()
            .map(|x| x.is_integer().then(|| x.to_integer()))
            .collect()
    }

    /// Representative in `[0, 1)^d`.
    pub fn reduce_mod_one(&self) -> Self {
        Self(self.0.iter().map(frac).collect())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self(self.0.iter().map(|x| x * s).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Least common multiple of the denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.0
            .iter()
            .fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()))
    }
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Index<usize> for RatVector {
    type Output = BigRational;

    fn index(&self, i: usize) -> &BigRational {
        &self.0[i]
    }
}

impl From<Vec<BigRational>> for RatVector {
    fn from(v: Vec<BigRational>) -> Self {
        Self(v)
    }
}

impl FromIterator<BigRational> for RatVector {
    fn from_iter<T: IntoIterator<Item = BigRational>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Add for &RatVector {
    type Output = RatVector;

    fn add(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect()
    }
}

impl Sub for &RatVector {
    type Output = RatVector;

    fn sub(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect()
    }
}

impl Neg for &RatVector {
    type Output = RatVector;

    fn neg(self) -> RatVector {
        self.0.iter().map(|a| -a).collect()
    }
}

impl fmt::Debug for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}
