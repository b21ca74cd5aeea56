use nalgebra::DVector;
use proptest::prelude::*;

use super::*;
use crate::crystal::{Lattice, SpaceGroup, TorusPoint, DEFAULT_GROUP_CAP};
use crate::exactalg::{IntMatrix, RatVector};

fn group(d: usize, gens: &[(IntMatrix, RatVector)]) -> SpaceGroup {
    SpaceGroup::from_generators(Lattice::cubic(d), gens, DEFAULT_GROUP_CAP).unwrap()
}

fn reflection_1d() -> SpaceGroup {
    group(1, &[(IntMatrix::diagonal(&[-1]), RatVector::zeros(1))])
}

fn screw() -> SpaceGroup {
    group(
        3,
        &[(
            IntMatrix::diagonal(&[-1, -1, 1]),
            RatVector::from_fracs(&[(0, 1), (0, 1), (1, 2)]),
        )],
    )
}

fn glide() -> SpaceGroup {
    group(2, &[(IntMatrix::diagonal(&[-1, 1]), RatVector::from_fracs(&[(0, 1), (1, 2)]))])
}

fn p212121() -> SpaceGroup {
    group(
        3,
        &[
            (
                IntMatrix::diagonal(&[1, -1, -1]),
                RatVector::from_fracs(&[(1, 2), (1, 2), (0, 1)]),
            ),
            (
                IntMatrix::diagonal(&[-1, 1, -1]),
                RatVector::from_fracs(&[(0, 1), (1, 2), (1, 2)]),
            ),
        ],
    )
}

fn hex_rotation() -> SpaceGroup {
    SpaceGroup::from_generators(
        Lattice::hexagonal_2d(),
        &[(IntMatrix::from_rows(&[[1, -1], [1, 0]]).unwrap(), RatVector::zeros(2))],
        DEFAULT_GROUP_CAP,
    )
    .unwrap()
}

fn point(fracs: &[(i64, i64)]) -> TorusPoint {
    TorusPoint::new(&RatVector::from_fracs(fracs))
}

fn mobius_cover(cells: usize) -> (CircleCover, FlatBundle) {
    let cover = CircleCover::new(3, cells, 2).unwrap();
    let bundle = cover.bundle(reflection_1d(), vec![0, 0, 1]).unwrap();
    (cover, bundle)
}

#[test]
fn mobius_holonomy_is_the_reflection() {
    let (cover, bundle) = mobius_cover(8);
    let h = holonomy(&bundle, &cover.loop_around()).unwrap();
    assert_eq!(h.linear, IntMatrix::diagonal(&[-1]));
    assert!(h.shift.is_zero());
    assert_eq!(h.apply(&point(&[(1, 3)])), point(&[(2, 3)]));

    let fixed = equilibrium_sections(&bundle, 0).unwrap();
    assert_eq!(
        fixed,
        FixedPointSet::Points(vec![point(&[(0, 1)]), point(&[(1, 2)])])
    );
}

#[test]
fn opposite_orientations_of_one_overlap_cancel() {
    // Declaring r on both 0->1 and 1->0 describes one overlap traversed
    // both ways, and the loop 0->1->0 retraces it.
    let base = BaseComplex::new(2, vec![(0, 1), (1, 0)], vec![]).unwrap();
    let bundle = FlatBundle::new(base, reflection_1d(), vec![1, 1]).unwrap();
    assert!(bundle.validate().is_valid());
    let h = holonomy(&bundle, &Loop::through(&[0, 1, 0]).unwrap()).unwrap();
    assert!(h.is_identity());
}

#[test]
fn reverse_edge_uses_the_inverse() {
    let sg = screw();
    let base = BaseComplex::new(2, vec![(0, 1)], vec![]).unwrap();
    let bundle = FlatBundle::new(base, sg.clone(), vec![1]).unwrap();
    let pg = sg.point_group();
    assert_eq!(bundle.transition(0, 1), Some(1));
    assert_eq!(bundle.transition(1, 0), Some(pg.inverse(1)));
    assert_eq!(bundle.transition(0, 0), None);
}

#[test]
fn validation_flags_bad_data() {
    let sg = reflection_1d();
    let base = BaseComplex::new(3, vec![(0, 1), (1, 2), (0, 2)], vec![[0, 1, 2]]).unwrap();
    let bad = FlatBundle::new(base.clone(), sg.clone(), vec![1, 0, 0]).unwrap();
    assert_eq!(
        bad.validate().violations,
        vec![BundleViolation::TriangleCocycle { triangle: [0, 1, 2] }]
    );
    let good = FlatBundle::new(base, sg.clone(), vec![1, 1, 0]).unwrap();
    assert!(good.validate().is_valid());

    let base = BaseComplex::new(2, vec![(0, 1), (1, 0)], vec![]).unwrap();
    let mismatched = FlatBundle::new(base, sg, vec![1, 0]).unwrap();
    assert_eq!(
        mismatched.validate().violations,
        vec![BundleViolation::ReverseMismatch { from: 0, to: 1 }]
    );
}

#[test]
fn malformed_complexes_are_rejected() {
    assert!(BaseComplex::new(2, vec![(0, 2)], vec![]).is_err());
    assert!(BaseComplex::new(2, vec![(1, 1)], vec![]).is_err());
    assert!(BaseComplex::new(2, vec![(0, 1), (0, 1)], vec![]).is_err());
    assert!(BaseComplex::new(3, vec![(0, 1), (1, 2)], vec![[0, 1, 2]]).is_err());
    let base = BaseComplex::new(2, vec![(0, 1)], vec![]).unwrap();
    assert!(FlatBundle::new(base.clone(), reflection_1d(), vec![]).is_err());
    assert!(FlatBundle::new(base, reflection_1d(), vec![5]).is_err());
}

#[test]
fn broken_loops_are_rejected() {
    assert!(matches!(Loop::new(vec![]), Err(BundleError::BrokenChain(_))));
    assert!(matches!(
        Loop::new(vec![(0, 1), (2, 0)]),
        Err(BundleError::BrokenChain(_))
    ));
    assert!(matches!(Loop::through(&[0, 1, 2]), Err(BundleError::BrokenChain(_))));
    let (_, bundle) = mobius_cover(8);
    let backwards = Loop::through(&[0, 2, 1, 0]).unwrap();
    assert!(holonomy(&bundle, &backwards).is_ok());
    let base = BaseComplex::new(3, vec![(0, 1), (1, 2)], vec![]).unwrap();
    let open = FlatBundle::new(base, reflection_1d(), vec![1, 1]).unwrap();
    assert_eq!(
        holonomy(&open, &Loop::through(&[0, 1, 2, 0]).unwrap()),
        Err(BundleError::UnknownEdge { from: 2, to: 0 })
    );
}

#[test]
fn screw_holonomy_has_no_equilibrium() {
    let cover = CircleCover::new(3, 8, 2).unwrap();
    let bundle = cover.bundle(screw(), vec![0, 0, 1]).unwrap();
    let h = holonomy(&bundle, &cover.loop_around()).unwrap();
    assert_eq!(h.linear, IntMatrix::diagonal(&[-1, -1, 1]));
    assert_eq!(h.shift, RatVector::from_fracs(&[(0, 1), (0, 1), (1, 2)]));
    assert!(equilibrium_sections(&bundle, 0).unwrap().is_empty());
    assert_eq!(
        cover.compatible_section(&bundle, 0.01),
        Err(BundleError::NoEquilibrium)
    );

    // The linear part alone does have fixed points: the shift is what
    // obstructs them.
    let linear = bundle.with_space_group(bundle.space_group().linear_part()).unwrap();
    match equilibrium_sections(&linear, 0).unwrap() {
        FixedPointSet::Subtorus { dim, representatives, .. } => {
            assert_eq!(dim, 1);
            assert_eq!(representatives.len(), 4);
        }
        other => panic!("expected circles of fixed points, got {other:?}"),
    }
}

#[test]
fn trivial_holonomy_fixes_the_whole_torus() {
    let cover = CircleCover::new(3, 8, 2).unwrap();
    let bundle = cover.bundle(glide(), vec![1, 1, 0]).unwrap();
    let gens = holonomy_generators(&bundle, 0).unwrap();
    assert_eq!(gens.len(), 1);
    assert!(gens[0].1.is_identity());
    assert!(matches!(
        equilibrium_sections(&bundle, 0).unwrap(),
        FixedPointSet::Subtorus { dim: 2, .. }
    ));
}

#[test]
fn holonomy_generators_follow_the_bfs_tree() {
    // Square 0-1-2-3 with diagonal 0-2: two independent cycles.
    let base = BaseComplex::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], vec![]).unwrap();
    let bundle = FlatBundle::new(base, reflection_1d(), vec![1, 0, 0, 0, 0]).unwrap();
    let gens = holonomy_generators(&bundle, 0).unwrap();
    let loops: Vec<Vec<(usize, usize)>> = gens.iter().map(|(l, _)| l.steps().to_vec()).collect();
    assert_eq!(
        loops,
        vec![vec![(0, 1), (1, 2), (2, 0)], vec![(0, 2), (2, 3), (3, 0)]]
    );
    assert!(!gens[0].1.is_identity());
    assert!(gens[1].1.is_identity());
    assert!(holonomy_generators(&bundle, 4).is_err());
}

#[test]
fn compatible_sections_glue_on_every_overlap() {
    for (sg, transitions) in [
        (reflection_1d(), vec![0, 0, 1]),
        (glide(), vec![1, 1, 0]),
        (hex_rotation(), vec![1, 2, 3]),
    ] {
        let cover = CircleCover::new(3, 16, 3).unwrap();
        let bundle = cover.bundle(sg, transitions).unwrap();
        let section = cover.compatible_section(&bundle, 0.05).unwrap();
        let report = check_section_gluing(&bundle, &section, 1e-12).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.edges.iter().all(|e| e.lattice_vector.is_some()));
    }
}

#[test]
fn glide_shift_appears_in_the_gluing() {
    let cover = CircleCover::new(3, 16, 3).unwrap();
    let bundle = cover.bundle(glide(), vec![1, 1, 0]).unwrap();
    let section = cover.compatible_section(&bundle, 0.05).unwrap();
    let report = check_section_gluing(&bundle, &section, 1e-12).unwrap();
    let half = RatVector::from_fracs(&[(0, 1), (1, 2)]);
    assert_eq!(report.edges[0].shift, half);
    assert_eq!(report.edges[1].shift, half);
    assert!(report.edges[2].shift.is_zero());

    // Dropping the shift breaks the lift relation by exactly half a period.
    let linear = bundle.with_space_group(bundle.space_group().linear_part()).unwrap();
    let broken = check_section_gluing(&linear, &section, 1e-12).unwrap();
    assert!(!broken.edges[0].passed);
    assert!((broken.edges[0].max_residual - 0.5).abs() < 1e-12);
}

#[test]
fn winding_jump_inside_an_overlap_is_reported() {
    let (cover, bundle) = mobius_cover(16);
    let section = cover.compatible_section(&bundle, 0.05).unwrap();
    let last = cover.samples_per_chart() - 1;
    let jumped = section.map_values(|c, i, v| {
        if c == 1 && i == 1 {
            v.add_scalar(1.0)
        } else if c == 2 && i == last {
            v.add_scalar(0.45)
        } else {
            v.clone()
        }
    });
    let report = check_section_gluing(&bundle, &jumped, 1e-9).unwrap();
    assert!(report.edges[0].winding_inconsistent);
    assert!(report.edges[0].lattice_vector.is_none());
    assert!(!report.edges[0].passed);
    assert!(report.edges[1].passed);
    assert!(report.edges[2].ambiguous);
    assert!(!report.edges[2].passed);
}

#[test]
fn section_layout_is_validated() {
    let grid = ChartGrid {
        start: 0.0,
        end: 1.0,
        samples: 3,
    };
    let v = |x: f64| DVector::from_vec(vec![x]);
    let values = vec![v(0.0), v(0.5), v(1.0)];
    let overlap = |len| Overlap {
        from: 0,
        to: 1,
        from_start: 1,
        to_start: 0,
        len,
    };
    assert!(SectionField::new(vec![grid; 2], vec![values.clone(); 2], vec![overlap(2)]).is_ok());
    assert!(SectionField::new(vec![grid; 2], vec![values.clone(); 2], vec![overlap(3)]).is_err());
    assert!(SectionField::new(vec![grid; 2], vec![values.clone()], vec![]).is_err());
    let coarse = ChartGrid { samples: 2, ..grid };
    assert!(SectionField::new(
        vec![grid, coarse],
        vec![values.clone(), vec![v(0.0), v(1.0)]],
        vec![overlap(1)]
    )
    .is_err());
    let short = SectionField::new(vec![coarse], vec![vec![v(0.0), v(1.0)]], vec![]).unwrap();
    assert_eq!(
        covariant_differential(&short),
        Err(BundleError::TooFewSamples { chart: 0, samples: 2 })
    );
}

fn single_chart(n: usize, f: impl Fn(f64) -> f64) -> SectionField {
    let grid = ChartGrid {
        start: 0.0,
        end: 1.0,
        samples: n,
    };
    let values = (0..n).map(|i| DVector::from_vec(vec![f(grid.point(i))])).collect();
    SectionField::new(vec![grid], vec![values], vec![]).unwrap()
}

#[test]
fn differential_of_a_quadratic_is_exact() {
    let field = covariant_differential(&single_chart(11, |x| x * x)).unwrap();
    let grid = field.grids()[0];
    for (i, du) in field.derivatives()[0].iter().enumerate() {
        assert!((du[0] - 2.0 * grid.point(i)).abs() < 1e-12);
    }
}

#[test]
fn endpoint_stencil_is_second_order() {
    let endpoint_error = |n: usize| {
        let field = covariant_differential(&single_chart(n, |x| x * x * x)).unwrap();
        let d = &field.derivatives()[0];
        (d[0][0] - 0.0).abs().max((d[n - 1][0] - 3.0).abs())
    };
    let (coarse, fine) = (endpoint_error(21), endpoint_error(41));
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

fn derivative_residual(cells: usize, sg: SpaceGroup, transitions: Vec<usize>) -> f64 {
    let cover = CircleCover::new(3, cells, 2).unwrap();
    let bundle = cover.bundle(sg, transitions).unwrap();
    let section = cover.compatible_section(&bundle, 0.05).unwrap();
    let field = covariant_differential(&section).unwrap();
    let report = check_derivative_gluing(&bundle, &field, 1.0).unwrap();
    assert!(report.interior_residual() < 1e-10);
    report.max_residual()
}

#[test]
fn derivative_gluing_residual_is_second_order() {
    let a = derivative_residual(32, reflection_1d(), vec![0, 0, 1]);
    let b = derivative_residual(64, reflection_1d(), vec![0, 0, 1]);
    let ratio = a / b;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn derivative_gluing_ignores_translations() {
    let cover = CircleCover::new(3, 16, 2).unwrap();
    let bundle = cover.bundle(glide(), vec![1, 1, 0]).unwrap();
    let field = covariant_differential(&cover.compatible_section(&bundle, 0.05).unwrap()).unwrap();
    let linear = bundle.with_space_group(bundle.space_group().linear_part()).unwrap();
    assert_eq!(
        check_derivative_gluing(&bundle, &field, 1e-2).unwrap(),
        check_derivative_gluing(&linear, &field, 1e-2).unwrap()
    );
}

fn groups() -> Vec<SpaceGroup> {
    vec![reflection_1d(), screw(), glide(), p212121(), hex_rotation()]
}

/// Random connected complex on `n` charts: a path plus extra chords, every
/// edge with a random orientation, and every 3-cycle filled.
fn random_complex(n: usize, chords: &[(usize, usize)], flips: &[bool]) -> BaseComplex {
    let mut und: Vec<(usize, usize)> = (1..n).map(|k| (k - 1, k)).collect();
    for &(a, b) in chords {
        let (a, b) = (a % n, b % n);
        if a != b && !und.contains(&(a.min(b), a.max(b))) {
            und.push((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(usize, usize)> = und
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| if flips[i % flips.len()] { (b, a) } else { (a, b) })
        .collect();
    let mut triangles = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let has = |x: usize, y: usize| und.contains(&(x, y));
                if has(a, b) && has(b, c) && has(a, c) {
                    triangles.push([a, b, c]);
                }
            }
        }
    }
    BaseComplex::new(n, edges, triangles).unwrap()
}

fn random_loop(base: &BaseComplex, start: usize, choices: &[usize]) -> Loop {
    let adj = base.neighbours();
    let mut charts = vec![start];
    for &c in choices {
        let cur = *charts.last().unwrap();
        charts.push(adj[cur][c % adj[cur].len()]);
    }
    // return along the breadth-first tree
    let mut parent = vec![usize::MAX; base.charts()];
    parent[start] = start;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    let mut cur = *charts.last().unwrap();
    while cur != start {
        cur = parent[cur];
        charts.push(cur);
    }
    if charts.len() == 1 {
        charts.extend([adj[start][0], start]);
    }
    Loop::through(&charts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_transitions_are_flat(
        gi in 0usize..5,
        n in 3usize..=12,
        chords in proptest::collection::vec((0usize..12, 0usize..12), 0..15),
        flips in proptest::collection::vec(any::<bool>(), 1..8),
        gauge in proptest::collection::vec(0usize..1000, 12),
    ) {
        let sg = groups().swap_remove(gi);
        let pg = sg.point_group().clone();
        let base = random_complex(n, &chords, &flips);
        let h: Vec<usize> = gauge.iter().map(|&g| g % pg.order()).collect();
        let transitions = base
            .edges()
            .iter()
            .map(|&(a, b)| pg.multiply(pg.inverse(h[a]), h[b]))
            .collect();
        let bundle = FlatBundle::new(base.clone(), sg, transitions).unwrap();
        prop_assert!(bundle.validate().is_valid());
        for &[a, b, c] in base.triangles() {
            let lp = Loop::through(&[a, b, c, a]).unwrap();
            prop_assert!(holonomy(&bundle, &lp).unwrap().is_identity());
        }
        // A pure gauge has trivial holonomy on every cycle.
        for (_, hol) in holonomy_generators(&bundle, 0).unwrap() {
            prop_assert!(hol.is_identity());
        }
    }

    #[test]
    fn holonomy_respects_concatenation_and_reversal(
        gi in 0usize..5,
        n in 3usize..=12,
        chords in proptest::collection::vec((0usize..12, 0usize..12), 0..15),
        flips in proptest::collection::vec(any::<bool>(), 1..8),
        labels in proptest::collection::vec(0usize..1000, 30),
        walk1 in proptest::collection::vec(0usize..12, 1..10),
        walk2 in proptest::collection::vec(0usize..12, 1..10),
    ) {
        let sg = groups().swap_remove(gi);
        let order = sg.order();
        let base = random_complex(n, &chords, &flips);
        let transitions = (0..base.edges().len()).map(|e| labels[e % labels.len()] % order).collect();
        let bundle = FlatBundle::new(base.clone(), sg, transitions).unwrap();
        let l1 = random_loop(&base, 0, &walk1);
        let l2 = random_loop(&base, 0, &walk2);
        let h1 = holonomy(&bundle, &l1).unwrap();
        let h2 = holonomy(&bundle, &l2).unwrap();
        prop_assert_eq!(holonomy(&bundle, &l1.concat(&l2).unwrap()).unwrap(), h1.then(&h2));
        prop_assert_eq!(holonomy(&bundle, &l1.reversed()).unwrap(), h1.inverse());
    }

    #[test]
    fn fixed_points_are_fixed_exactly(
        gi in 0usize..5,
        n in 3usize..=12,
        chords in proptest::collection::vec((0usize..12, 0usize..12), 0..15),
        flips in proptest::collection::vec(any::<bool>(), 1..8),
        labels in proptest::collection::vec(0usize..1000, 30),
    ) {
        let sg = groups().swap_remove(gi);
        let order = sg.order();
        let base = random_complex(n, &chords, &flips);
        let transitions = (0..base.edges().len()).map(|e| labels[e % labels.len()] % order).collect();
        let bundle = FlatBundle::new(base, sg, transitions).unwrap();
        let gens = holonomy_generators(&bundle, 0).unwrap();
        let fixed = equilibrium_sections(&bundle, 0).unwrap();
        for v in fixed.representatives() {
            for (_, h) in &gens {
                prop_assert!(h.fixes(v));
            }
        }
        if let FixedPointSet::Subtorus { directions, representatives, .. } = &fixed {
            // moving along a free direction stays fixed
            let v = representatives[0].coords();
            for dir in directions {
                let moved = TorusPoint::new(&(v + &dir.scale(&crate::exactalg::rational::rat(1, 7))));
                for (_, h) in &gens {
                    prop_assert!(h.fixes(&moved));
                }
            }
        }
    }
}
