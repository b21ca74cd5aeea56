//! Independent oracles for the exact-algebra routines: cofactor
//! determinants in `i128`, determinantal divisors, and a brute-force search
//! for solutions of `M t ≡ b (mod Z^m)` on a rational grid.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crystorus::exactalg::{IntMatrix, ModLatticeSolution, RatVector, SnfDecomposition};

pub type Mat = Vec<Vec<i64>>;

pub fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    match n {
        0 => 1,
        1 => m[0][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det_i128(&minor)
            })
            .sum(),
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// gcd of all `k × k` minors (the `k`-th determinantal divisor).
pub fn minors_gcd(m: &Mat, k: usize) -> i128 {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut g: i128 = 0;
    for rs in subsets(rows, k) {
        for cs in subsets(cols, k) {
            let sub: Vec<Vec<i128>> = rs
                .iter()
                .map(|&r| cs.iter().map(|&c| m[r][c] as i128).collect())
                .collect();
            g = g.gcd(&det_i128(&sub));
        }
    }
    g
}

pub fn rank(m: &Mat) -> usize {
    let max = m.len().min(m.first().map_or(0, Vec::len));
    (1..=max).rev().find(|&k| minors_gcd(m, k) != 0).unwrap_or(0)
}

pub fn to_mat(m: &IntMatrix) -> Mat {
    m.to_i64_rows().expect("entries fit in i64")
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|r| (0..cols).map(|j| (0..inner).map(|k| r[k] * b[k][j]).sum()).collect())
        .collect()
}

fn det_i64(m: &Mat) -> i128 {
    det_i128(&m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect::<Vec<_>>())
}

/// Checks an SNF against its input using only the oracles in this file.
pub fn check_snf(m: &Mat, snf: &SnfDecomposition) -> Result<(), String> {
    let (u, s, v) = (to_mat(&snf.u), to_mat(&snf.s), to_mat(&snf.v));
    if mat_mul(&mat_mul(&u, m), &v) != s {
        return Err("U M V != S".into());
    }
    if det_i64(&u).abs() != 1 || det_i64(&v).abs() != 1 {
        return Err("U or V is not unimodular".into());
    }
    let r = rank(m);
    if snf.rank() != r {
        return Err(format!("rank {} but the minors give {r}", snf.rank()));
    }
    for (i, row) in s.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if i != j && x != 0 {
                return Err("S is not diagonal".into());
            }
            if i == j && (x < 0 || (i >= r && x != 0) || (i < r && x == 0)) {
                return Err("diagonal of S has the wrong sign pattern".into());
            }
        }
    }
    let mut prod: i128 = 1;
    for i in 0..r {
        let si = s[i][i] as i128;
        if i + 1 < r && (s[i + 1][i + 1] as i128) % si != 0 {
            return Err("divisibility chain broken".into());
        }
        prod *= si;
        if prod != minors_gcd(m, i + 1) {
            return Err(format!("s_1..s_{} disagrees with the determinantal divisor", i + 1));
        }
    }
    Ok(())
}

fn lcm_den(b: &[(i64, i64)]) -> i64 {
    b.iter().fold(1, |l, &(_, q)| l.lcm(&q))
}

/// Grid denominator on which every coset of the solution set has a point:
/// the top determinantal divisor times the denominators of `b`.
pub fn grid_denominator(m: &Mat, b: &[(i64, i64)]) -> i64 {
    let r = rank(m);
    let dr = if r == 0 { 1 } else { minors_gcd(m, r).abs() as i64 };
    dr * lcm_den(b)
}

/// Numerators `x ∈ [0, D)^n` with `M x / D ≡ b (mod Z^m)`.
pub fn grid_solutions(m: &Mat, b: &[(i64, i64)], den: i64) -> BTreeSet<Vec<i64>> {
    let n = m[0].len();
    let mut out = BTreeSet::new();
    let total = (den as u64).pow(n as u32);
    for code in 0..total {
        let x: Vec<i64> = (0..n)
            .map(|i| ((code / (den as u64).pow(i as u32)) % den as u64) as i64)
            .collect();
        let ok = m.iter().zip(b).all(|(row, &(p, q))| {
            let mx: i128 = row.iter().zip(&x).map(|(a, xi)| (*a as i128) * (*xi as i128)).sum();
            // M x / D - p / q ∈ Z  <=>  D q | (M x q - p D)
            let num = mx * q as i128 - p as i128 * den as i128;
            num % (den as i128 * q as i128) == 0
        });
        if ok {
            out.insert(x);
        }
    }
    out
}

fn grid_numerators(v: &RatVector, den: i64) -> Option<Vec<i64>> {
    let d = BigRational::from_integer(BigInt::from(den));
    v.reduce_mod_one()
        .iter()
        .map(|x| {
            let y = x * &d;
            y.is_integer().then(|| y.to_integer().to_i64().unwrap())
        })
        .collect()
}

/// Compares a solver answer with the brute-force grid, returning a
/// description of the first disagreement.
pub fn check_mod_lattice(m: &Mat, b: &[(i64, i64)], sol: &ModLatticeSolution) -> Result<(), String> {
    let den = grid_denominator(m, b);
    let grid = grid_solutions(m, b, den);
    if sol.solvable != !grid.is_empty() {
        return Err(format!("solvable = {} but the grid has {} solutions", sol.solvable, grid.len()));
    }
    if !sol.solvable {
        return Ok(());
    }
    let im = IntMatrix::from_rows(m).unwrap();
    let bv = RatVector::from_fracs(b);
    for rep in sol.representatives() {
        let r = RatVector::new(im.mul_rat(rep.as_slice()).unwrap());
        if !(&r - &bv).is_integral() {
            return Err(format!("representative {rep} does not solve the system"));
        }
    }
    let n = m[0].len();
    let f = sol.free_directions.len();
    if f != n - rank(m) {
        return Err(format!("{f} free directions, kernel has dimension {}", n - rank(m)));
    }
    let free: Vec<Vec<i64>> = sol
        .free_directions
        .iter()
        .map(|v| {
            v.to_integers()
                .expect("free directions are integral")
                .iter()
                .map(|x| x.to_i64().unwrap())
                .collect()
        })
        .collect();
    for fv in &free {
        if m.iter().any(|row| row.iter().zip(fv).map(|(a, x)| a * x).sum::<i64>() != 0) {
            return Err("free direction is not in the kernel".into());
        }
    }
    if f > 0 {
        // primitive span: then span(F) ∩ (1/D)Z^n = F·(1/D)Z^f
        let cols: Mat = (0..n).map(|i| free.iter().map(|v| v[i]).collect()).collect();
        if minors_gcd(&cols, f).abs() != 1 {
            return Err("free directions do not span a saturated sublattice".into());
        }
    }
    let mut described = BTreeSet::new();
    let steps = (den as u64).pow(f as u32);
    for rep in sol.representatives() {
        let base = grid_numerators(&rep, den).ok_or_else(|| format!("representative {rep} is off the grid"))?;
        for code in 0..steps {
            let mut x = base.clone();
            for (j, fv) in free.iter().enumerate() {
                let c = ((code / (den as u64).pow(j as u32)) % den as u64) as i64;
                for (xi, a) in x.iter_mut().zip(fv) {
                    *xi += c * a;
                }
            }
            described.insert(x.iter().map(|xi| xi.rem_euclid(den)).collect::<Vec<_>>());
        }
    }
    if described != grid {
        return Err(format!(
            "described set has {} grid points, brute force finds {}",
            described.len(),
            grid.len()
        ));
    }
    let reduced: BTreeSet<RatVector> = sol.representatives().iter().map(RatVector::reduce_mod_one).collect();
    if f == 0 && reduced.len() != sol.discrete_offsets.len() {
        return Err("representatives are not distinct modulo Z^n".into());
    }
    Ok(())
}

/// Largest grid the brute force is allowed to enumerate.
pub const MAX_GRID: u64 = 200_000;

pub fn grid_size(m: &Mat, b: &[(i64, i64)]) -> u64 {
    let den = grid_denominator(m, b) as u64;
    den.checked_pow(m[0].len() as u32).unwrap_or(u64::MAX)
}
