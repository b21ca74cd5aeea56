use nalgebra::DMatrix;

use super::PhononError;

/// Lamé moduli and scalar density of an isotropic medium.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsotropicModuli {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
}

impl IsotropicModuli {
    /// `μ > 0`, `λ + 2μ > 0`, `ρ > 0`.
    pub fn validate(&self) -> Result<(), PhononError> {
        if !(self.mu > 0.0) {
            return Err(PhononError::InvalidModuli("mu must be positive".into()));
        }
        if !(self.lambda + 2.0 * self.mu > 0.0) {
            return Err(PhononError::InvalidModuli("lambda + 2 mu must be positive".into()));
        }
        if !(self.rho > 0.0) {
            return Err(PhononError::InvalidModuli("rho must be positive".into()));
        }
        Ok(())
    }

    pub fn longitudinal_speed(&self) -> f64 {
        ((self.lambda + 2.0 * self.mu) / self.rho).sqrt()
    }

    pub fn transverse_speed(&self) -> f64 {
        (self.mu / self.rho).sqrt()
    }
}

/// Cubic elastic constants and scalar density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicModuli {
    pub c11: f64,
    pub c12: f64,
    pub c44: f64,
    pub rho: f64,
}

impl CubicModuli {
    /// `C₄₄ > 0`, `C₁₁ - C₁₂ > 0`, `C₁₁ + 2C₁₂ > 0`, `ρ > 0`.
    pub fn validate(&self) -> Result<(), PhononError> {
        let checks = [
            (self.c44 > 0.0, "c44 must be positive"),
            (self.c11 - self.c12 > 0.0, "c11 - c12 must be positive"),
            (self.c11 + 2.0 * self.c12 > 0.0, "c11 + 2 c12 must be positive"),
            (self.rho > 0.0, "rho must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(PhononError::InvalidModuli((*msg).into())),
            None => Ok(()),
        }
    }

    /// Ascending `ω²` for `k = (|k|, 0, 0)`.
    pub fn omega_squared_100(&self, k: f64) -> [f64; 3] {
        let k2 = k * k / self.rho;
        let mut w = [self.c44 * k2, self.c44 * k2, self.c11 * k2];
        w.sort_by(f64::total_cmp);
        w
    }

    /// Ascending `ω²` for `k = |k| (1, 1, 1)/√3`.
    pub fn omega_squared_111(&self, k: f64) -> [f64; 3] {
        let k2 = k * k / (3.0 * self.rho);
        let t = (self.c11 - self.c12 + self.c44) * k2;
        let l = (self.c11 + 2.0 * self.c12 + 4.0 * self.c44) * k2;
        let mut w = [t, t, l];
        w.sort_by(f64::total_cmp);
        w
    }
}

fn check_3(k: &[f64]) -> Result<(), PhononError> {
    if k.len() != 3 {
        return Err(PhononError::Shape(format!("expected 3 components, got {}", k.len())));
    }
    Ok(())
}

/// `𝒞_ij = C₄₄|k|²δ_ij + (C₁₂+C₄₄) k_i k_j + (C₁₁-C₁₂-2C₄₄) k_i² δ_ij`.
pub fn cubic_christoffel(m: &CubicModuli, k: &[f64]) -> Result<DMatrix<f64>, PhononError> {
    check_3(k)?;
    let k2: f64 = k.iter().map(|x| x * x).sum();
    Ok(DMatrix::from_fn(3, 3, |i, j| {
        let mut c = (m.c12 + m.c44) * k[i] * k[j];
        if i == j {
            c += m.c44 * k2 + (m.c11 - m.c12 - 2.0 * m.c44) * k[i] * k[i];
        }
        c
    }))
}

/// Cubic stress `σ_ii = C₁₁ε_ii + C₁₂ Σ_{j≠i} ε_jj`, `σ_ij = 2C₄₄ε_ij`.
pub fn stress(m: &CubicModuli, strain: &DMatrix<f64>) -> Result<DMatrix<f64>, PhononError> {
    if strain.shape() != (3, 3) {
        return Err(PhononError::Shape("strain must be 3x3".into()));
    }
    let tr = strain.trace();
    Ok(DMatrix::from_fn(3, 3, |i, j| {
        if i == j {
            m.c11 * strain[(i, i)] + m.c12 * (tr - strain[(i, i)])
        } else {
            2.0 * m.c44 * strain[(i, j)]
        }
    }))
}

/// Cubic strain energy `½C₁₁Σε_ii² + C₁₂Σ_{i<j}ε_iiε_jj + 2C₄₄Σ_{i<j}ε_ij²`.
pub fn cubic_energy(m: &CubicModuli, strain: &DMatrix<f64>) -> Result<f64, PhononError> {
    if strain.shape() != (3, 3) {
        return Err(PhononError::Shape("strain must be 3x3".into()));
    }
    let e = |i: usize, j: usize| strain[(i, j)];
    let mut w = 0.0;
    for i in 0..3 {
        w += 0.5 * m.c11 * e(i, i) * e(i, i);
        for j in i + 1..3 {
            w += m.c12 * e(i, i) * e(j, j) + 2.0 * m.c44 * e(i, j) * e(i, j);
        }
    }
    Ok(w)
}
