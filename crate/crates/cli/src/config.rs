//! TOML configuration schema and its conversion into library objects.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crystorus::bundle::{BaseComplex, CircleCover, FlatBundle};
use crystorus::crystal::{Lattice, SpaceGroup, DEFAULT_GROUP_CAP};
use crystorus::exactalg::{IntMatrix, RatVector};
use crystorus::phonon::{
    assemble_cubic, assemble_isotropic, CubicModuli, DensityMatrix, ElasticTensor, IsotropicModuli,
};

use crate::CliError;

/// Exact rational written as `"p/q"` or `"p"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rational(pub BigRational);

impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let parse = |t: &str| {
            BigInt::from_str(t.trim()).map_err(|_| format!("`{s}` is not a rational of the form p/q"))
        };
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (parse(n)?, parse(d)?),
            None => (parse(s)?, BigInt::from(1)),
        };
        if den.is_zero() {
            return Err(format!("`{s}` has a zero denominator"));
        }
        Ok(Self(BigRational::new(num, den)))
    }
}

impl TryFrom<String> for Rational {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Rational> for String {
    fn from(r: Rational) -> String {
        r.to_string()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub generators: Vec<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elasticity: Option<ElasticityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kpath: Option<KPathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
}

/// `basis` lists the lattice vectors in Cartesian coordinates, one per row;
/// `gram` holds their exact inner products.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub basis: Vec<Vec<f64>>,
    pub gram: Vec<Vec<Rational>>,
}

/// Symmetry operation `x -> A x + a` in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub matrix: Vec<Vec<i64>>,
    pub translation: Vec<Rational>,
}

/// Element indices follow the closure order of the point group: the
/// identity is 0 and the distinct generators come next, in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    pub charts: usize,
    pub edges: Vec<EdgeConfig>,
    #[serde(default)]
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub basepoint: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub from: usize,
    pub to: usize,
    pub element: usize,
}

/// Sampled compatible section on a cyclic cover `0 -> 1 -> … -> n-1 -> 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    pub cells_per_chart: usize,
    pub overlap_cells: usize,
    pub amplitude: f64,
    #[serde(default = "default_derivative_tolerance")]
    pub derivative_tolerance: f64,
}

fn default_derivative_tolerance() -> f64 {
    1e-2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElasticModel {
    Isotropic,
    Cubic,
    FullTensor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticityConfig {
    pub model: ElasticModel,
    /// Scalar density; ignored when `density_matrix` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c11: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c12: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c44: Option<f64>,
    /// `C^{ab}_{ij}` flattened in the order `((a·d + b)·d + i)·d + j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub objective: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KPathConfig {
    pub waypoints: Vec<Vec<f64>>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub direction: Vec<f64>,
    pub points: usize,
    #[serde(default = "unit_length")]
    pub length: f64,
    pub mode: usize,
    pub branch: usize,
    pub amplitude: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    /// Explicit time step; defaults to the largest stable one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn unit_length() -> f64 {
    1.0
}

impl Config {
    /// Parses TOML, reporting the path of the offending field on error.
    pub fn from_toml(text: &str) -> Result<Config, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Schema(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Schema(format!("{path}: {}", e.into_inner().message()))
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn dim(&self) -> usize {
        self.lattice.basis.len()
    }

    pub fn lattice(&self) -> Result<Lattice, CliError> {
        let d = self.dim();
        if d == 0 || self.lattice.basis.iter().any(|r| r.len() != d) {
            return Err(CliError::Schema("lattice.basis: expected a non-empty square array".into()));
        }
        if self.lattice.gram.len() != d || self.lattice.gram.iter().any(|r| r.len() != d) {
            return Err(CliError::Schema(format!("lattice.gram: expected {d}x{d} entries")));
        }
        // rows of the config are the basis vectors, the columns of B
        let basis = DMatrix::from_fn(d, d, |i, j| self.lattice.basis[j][i]);
        let gram = self
            .lattice
            .gram
            .iter()
            .map(|r| r.iter().map(|x| x.0.clone()).collect())
            .collect();
        Lattice::new(basis, gram).map_err(|e| CliError::Domain(e.to_string()))
    }

    pub fn space_group(&self) -> Result<SpaceGroup, CliError> {
        let lattice = self.lattice()?;
        let d = lattice.dim();
        let mut gens = Vec::with_capacity(self.generators.len());
        for (gi, g) in self.generators.iter().enumerate() {
            if g.matrix.len() != d || g.matrix.iter().any(|r| r.len() != d) {
                return Err(CliError::Schema(format!("generators[{gi}].matrix: expected {d}x{d}")));
            }
            if g.translation.len() != d {
                return Err(CliError::Schema(format!(
                    "generators[{gi}].translation: expected {d} entries"
                )));
            }
            let m = IntMatrix::from_rows(&g.matrix).map_err(|e| CliError::Schema(e.to_string()))?;
            let t = RatVector::new(g.translation.iter().map(|x| x.0.clone()).collect());
            gens.push((m, t));
        }
        SpaceGroup::from_generators(lattice, &gens, DEFAULT_GROUP_CAP).map_err(|e| CliError::Domain(e.to_string()))
    }

    pub fn bundle(&self, sg: SpaceGroup) -> Result<Option<FlatBundle>, CliError> {
        let Some(b) = &self.bundle else {
            return Ok(None);
        };
        let edges = b.edges.iter().map(|e| (e.from, e.to)).collect();
        let transitions = b.edges.iter().map(|e| e.element).collect();
        let base = BaseComplex::new(b.charts, edges, b.triangles.clone()).map_err(|e| CliError::Domain(e.to_string()))?;
        FlatBundle::new(base, sg, transitions)
            .map(Some)
            .map_err(|e| CliError::Domain(e.to_string()))
    }

    /// Circle cover matching the bundle's cyclic base, for section checks.
    pub fn circle_cover(&self, cells_override: Option<usize>) -> Result<Option<CircleCover>, CliError> {
        let Some(b) = &self.bundle else {
            return Ok(None);
        };
        let Some(s) = &b.section else {
            return Ok(None);
        };
        let cells = cells_override.unwrap_or(s.cells_per_chart);
        CircleCover::new(b.charts, cells, s.overlap_cells)
            .map(Some)
            .map_err(|e| CliError::Domain(e.to_string()))
    }

    /// Density and elastic tensor in Cartesian coordinates, plus whether
    /// the closed-form positivity conditions hold (`None` for a full tensor).
    pub fn elasticity(&self) -> Result<(DensityMatrix, ElasticTensor, Option<bool>), CliError> {
        let Some(e) = &self.elasticity else {
            return Err(CliError::Schema("elasticity: section is required for this command".into()));
        };
        let d = self.dim();
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Schema(format!("elasticity.{name}: required for model {:?}", e.model)))
        };
        let scalar_density = || need(e.density, "density");
        let (rho, c, stable) = match e.model {
            ElasticModel::Isotropic => {
                let m = IsotropicModuli {
                    lambda: need(e.lambda, "lambda")?,
                    mu: need(e.mu, "mu")?,
                    rho: if e.density_matrix.is_some() { 1.0 } else { scalar_density()? },
                };
                let (rho, c) = assemble_isotropic(&m, d).map_err(domain)?;
                (rho, c, Some(m.validate().is_ok()))
            }
            ElasticModel::Cubic => {
                if d != 3 {
                    return Err(CliError::Schema("elasticity.model: cubic needs a 3-dimensional lattice".into()));
                }
                let m = CubicModuli {
                    c11: need(e.c11, "c11")?,
                    c12: need(e.c12, "c12")?,
                    c44: need(e.c44, "c44")?,
                    rho: if e.density_matrix.is_some() { 1.0 } else { scalar_density()? },
                };
                let (rho, c) = assemble_cubic(&m).map_err(domain)?;
                (rho, c, Some(m.validate().is_ok()))
            }
            ElasticModel::FullTensor => {
                let data = e
                    .tensor
                    .clone()
                    .ok_or_else(|| CliError::Schema("elasticity.tensor: required for model full-tensor".into()))?;
                let c = ElasticTensor::new(d, data, e.objective).map_err(domain)?;
                let rho = match &e.density_matrix {
                    Some(_) => DensityMatrix::scalar(1.0, d).map_err(domain)?,
                    None => DensityMatrix::scalar(scalar_density()?, d).map_err(domain)?,
                };
                (rho, c, None)
            }
        };
        let rho = match &e.density_matrix {
            Some(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(CliError::Schema(format!("elasticity.density_matrix: expected {d}x{d}")));
                }
                DensityMatrix::new(DMatrix::from_fn(d, d, |i, j| rows[i][j])).map_err(domain)?
            }
            None => rho,
        };
        Ok((rho, c, stable))
    }
}

fn domain(e: impl fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}
