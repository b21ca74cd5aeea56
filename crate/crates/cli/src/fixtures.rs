//! Built-in configurations, compiled into the binary.

use crate::config::{
    BundleConfig, Config, EdgeConfig, ElasticModel, ElasticityConfig, GeneratorConfig, KPathConfig,
    LatticeConfig, Rational, SectionConfig, SimulationConfig,
};

pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> Config,
}

impl Fixture {
    pub fn config(&self) -> Config {
        (self.build)()
    }
}

pub const CATALOG: &[Fixture] = &[
    Fixture {
        name: "mobius-1d",
        summary: "reflection of the circle glued around a 3-chart loop; fixed points {0, 1/2}",
        build: mobius_1d,
    },
    Fixture {
        name: "screw-p21-3d",
        summary: "2-fold screw along z (P2_1); nonsymmorphic, no equilibrium section",
        build: screw_p21_3d,
    },
    Fixture {
        name: "glide-pg-2d",
        summary: "glide reflection (pg); nonsymmorphic, shifts visible in section gluing",
        build: glide_pg_2d,
    },
    Fixture {
        name: "cubic-oh-3d",
        summary: "simple cubic lattice with full O_h symmetry and cubic elastic moduli",
        build: cubic_oh_3d,
    },
    Fixture {
        name: "trivial-pm",
        summary: "mirror group pm on a square lattice, trivial bundle, isotropic medium",
        build: trivial_pm,
    },
];

pub fn get(name: &str) -> Option<Config> {
    CATALOG.iter().find(|f| f.name == name).map(Fixture::config)
}

fn r(s: &str) -> Rational {
    s.parse().expect("fixture rationals are well formed")
}

fn cubic_lattice(d: usize) -> LatticeConfig {
    let eye = |i: usize, j: usize| (i == j) as u8;
    LatticeConfig {
        basis: (0..d).map(|i| (0..d).map(|j| eye(i, j) as f64).collect()).collect(),
        gram: (0..d).map(|i| (0..d).map(|j| r(&eye(i, j).to_string())).collect()).collect(),
    }
}

fn generator(matrix: &[&[i64]], translation: &[&str]) -> GeneratorConfig {
    GeneratorConfig {
        matrix: matrix.iter().map(|row| row.to_vec()).collect(),
        translation: translation.iter().map(|t| r(t)).collect(),
    }
}

/// Cycle `0 -> 1 -> 2 -> 0` with the given elements and a sampled section.
fn circle_bundle(elements: [usize; 3]) -> BundleConfig {
    BundleConfig {
        charts: 3,
        edges: (0..3)
            .map(|k| EdgeConfig {
                from: k,
                to: (k + 1) % 3,
                element: elements[k],
            })
            .collect(),
        triangles: Vec::new(),
        basepoint: 0,
        section: Some(SectionConfig {
            cells_per_chart: 32,
            overlap_cells: 2,
            amplitude: 0.05,
            derivative_tolerance: 1e-2,
        }),
    }
}

fn empty(lattice: LatticeConfig, description: &str) -> Config {
    Config {
        description: Some(description.into()),
        lattice,
        generators: Vec::new(),
        bundle: None,
        elasticity: None,
        kpath: None,
        simulation: None,
    }
}

fn mobius_1d() -> Config {
    Config {
        generators: vec![generator(&[&[-1]], &["0"])],
        bundle: Some(circle_bundle([0, 0, 1])),
        ..empty(cubic_lattice(1), "Moebius bundle: the circle fiber flips once around the base")
    }
}

fn screw_p21_3d() -> Config {
    Config {
        generators: vec![generator(&[&[-1, 0, 0], &[0, -1, 0], &[0, 0, 1]], &["0", "0", "1/2"])],
        bundle: Some(circle_bundle([0, 0, 1])),
        ..empty(cubic_lattice(3), "2-fold screw axis along z with half-period translation")
    }
}

fn glide_pg_2d() -> Config {
    Config {
        generators: vec![generator(&[&[-1, 0], &[0, 1]], &["0", "1/2"])],
        bundle: Some(circle_bundle([1, 1, 0])),
        ..empty(cubic_lattice(2), "glide reflection x -> -x with half-period shift along y")
    }
}

fn cubic_oh_3d() -> Config {
    Config {
        generators: vec![
            generator(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 1]], &["0", "0", "0"]),
            generator(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]], &["0", "0", "0"]),
            generator(&[&[-1, 0, 0], &[0, -1, 0], &[0, 0, -1]], &["0", "0", "0"]),
        ],
        elasticity: Some(ElasticityConfig {
            c11: Some(1.0),
            c12: Some(0.5),
            c44: Some(0.3),
            ..elasticity(ElasticModel::Cubic)
        }),
        kpath: Some(KPathConfig {
            waypoints: vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0],
                vec![1.0, 1.0, 1.0],
            ],
            samples: 16,
        }),
        simulation: Some(SimulationConfig {
            direction: vec![1.0, 0.0, 0.0],
            points: 256,
            length: 1.0,
            mode: 1,
            branch: 2,
            amplitude: 1e-3,
            steps: 2048,
            cfl: None,
            dt: None,
        }),
        ..empty(cubic_lattice(3), "simple cubic crystal, point group O_h")
    }
}

fn trivial_pm() -> Config {
    Config {
        generators: vec![generator(&[&[-1, 0], &[0, 1]], &["0", "0"])],
        bundle: Some(circle_bundle([0, 0, 0])),
        elasticity: Some(ElasticityConfig {
            lambda: Some(1.0),
            mu: Some(0.5),
            ..elasticity(ElasticModel::Isotropic)
        }),
        kpath: Some(KPathConfig {
            waypoints: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            samples: 8,
        }),
        simulation: Some(SimulationConfig {
            direction: vec![1.0, 1.0],
            points: 128,
            length: 1.0,
            mode: 1,
            branch: 0,
            amplitude: 1e-3,
            steps: 1024,
            cfl: None,
            dt: None,
        }),
        ..empty(cubic_lattice(2), "mirror symmetric square crystal with a trivial bundle")
    }
}

fn elasticity(model: ElasticModel) -> ElasticityConfig {
    ElasticityConfig {
        model,
        density: Some(1.0),
        density_matrix: None,
        lambda: None,
        mu: None,
        c11: None,
        c12: None,
        c44: None,
        tensor: None,
        objective: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_builds_its_objects() {
        for f in CATALOG {
            let cfg = f.config();
            let sg = cfg.space_group().unwrap_or_else(|e| panic!("{}: {e}", f.name));
            assert!(sg.verify_cocycle_identity().holds(), "{}", f.name);
            if let Some(b) = cfg.bundle(sg).unwrap() {
                assert!(b.validate().is_valid(), "{}", f.name);
            }
            if cfg.elasticity.is_some() {
                let (_, _, stable) = cfg.elasticity().unwrap();
                assert_eq!(stable, Some(true), "{}", f.name);
            }
        }
    }

    #[test]
    fn fixtures_round_trip_through_toml() {
        for f in CATALOG {
            let cfg = f.config();
            let text = cfg.to_toml();
            assert_eq!(Config::from_toml(&text).unwrap(), cfg, "{}:\n{text}", f.name);
        }
    }

    #[test]
    fn oh_has_48_elements() {
        assert_eq!(get("cubic-oh-3d").unwrap().space_group().unwrap().order(), 48);
    }
}
