use hstar_core::blk::{
    alpha_threshold, blk_enumerate_classes, blk_search, SignatureKey, WindingBound,
};
use hstar_core::fixtures::{disk, tiny_annulus, two_hole, Fixture};
use hstar_core::homology::{
    are_homologous, chain_of_path, hole_loop_values, path_projection, surface_harmonic_basis,
    HarmonicBasis, DEFAULT_HOMOLOGY_TOLERANCE,
};
use hstar_core::oracle::{
    enumerate_classes, enumerate_simple_paths, BoundarySpace, ClassTable, MAX_ORACLE_VERTICES,
};
use hstar_core::path::{dijkstra, path_weight, Path};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table(f: &Fixture, basis: &HarmonicBasis) -> ClassTable {
    enumerate_classes(&f.surface, basis, f.source, f.dest, MAX_ORACLE_VERTICES).unwrap()
}

fn random_rotation(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

fn is_simple(p: &Path) -> bool {
    let mut nodes = p.nodes().to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    nodes.len() == p.nodes().len()
}

#[test]
fn class_counts() {
    let cases = [
        (disk(4).unwrap(), 1),
        (tiny_annulus().unwrap(), 2),
        (two_hole().unwrap(), 4),
    ];
    for (f, expected) in cases {
        let basis = surface_harmonic_basis(&f.surface).unwrap();
        assert_eq!(table(&f, &basis).len(), expected);
    }
}

#[test]
fn annulus_classes_have_distinct_lengths() {
    let f = tiny_annulus().unwrap();
    let basis = surface_harmonic_basis(&f.surface).unwrap();
    let t = table(&f, &basis);
    let lengths: Vec<f64> = t.classes.values().map(|c| c.shortest_length).collect();
    assert!((lengths[0] - lengths[1]).abs() > 0.5, "{lengths:?}");
}

#[test]
fn homology_test_agrees_with_boundary_residual_on_every_pair() {
    let f = tiny_annulus().unwrap();
    let basis = surface_harmonic_basis(&f.surface).unwrap();
    let space = BoundarySpace::new(&f.surface).unwrap();
    let paths = enumerate_simple_paths(&f.surface, f.source, f.dest, MAX_ORACLE_VERTICES).unwrap();
    let chains: Vec<_> = paths
        .iter()
        .map(|p| chain_of_path(&f.surface, p).unwrap())
        .collect();
    let mut disagreements = 0;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let by_projection = are_homologous(
                &f.surface,
                &basis,
                &paths[i],
                &paths[j],
                DEFAULT_HOMOLOGY_TOLERANCE,
            )
            .unwrap();
            let by_residual = space.contains(&(&chains[i] - &chains[j]));
            disagreements += usize::from(by_projection != by_residual);
        }
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn blk_matches_enumeration() {
    for f in [tiny_annulus().unwrap(), two_hole().unwrap()] {
        let basis = surface_harmonic_basis(&f.surface).unwrap();
        let oracle = table(&f, &basis);
        let loops = hole_loop_values(&f.surface, &basis).unwrap();
        for entry in oracle.classes.values() {
            let bound = WindingBound::around(&entry.projection, &loops);
            let records =
                blk_enumerate_classes(&f.surface, &basis, f.source, f.dest, bound).unwrap();
            // Every simple-path class is inside the box and found with the same length.
            for (key, other) in &oracle.classes {
                let found = records.iter().find(|r| &r.signature_key == key).unwrap();
                assert!((found.shortest_length - other.shortest_length).abs() < 1e-12);
            }
            // Classes the enumeration misses can only be reached by revisiting a vertex.
            for r in records
                .iter()
                .filter(|r| oracle.get(&r.signature_key).is_none())
            {
                assert!(
                    !is_simple(&r.representative),
                    "class {} missed by enumeration",
                    r.signature_key
                );
            }
            // Uniform-cost discovery order.
            assert!(records
                .windows(2)
                .all(|w| w[0].shortest_length <= w[1].shortest_length));

            let out =
                blk_search(&f.surface, &basis, f.source, f.dest, &entry.representative).unwrap();
            assert!((out.result.length - entry.shortest_length).abs() < 1e-12);
            assert!(out.result.proj_diff < 1e-9);
            let shorter: Vec<_> = oracle
                .classes
                .values()
                .filter(|c| c.shortest_length < entry.shortest_length - 1e-12)
                .collect();
            for c in shorter {
                assert!(out
                    .classes
                    .iter()
                    .any(|r| (r.shortest_length - c.shortest_length).abs() < 1e-12));
            }
        }
    }
}

#[test]
fn blk_on_disk_is_dijkstra() {
    let f = disk(5).unwrap();
    let basis = surface_harmonic_basis(&f.surface).unwrap();
    let tree = dijkstra(&f.surface, f.source, None).unwrap();
    let reference = tree.path_to(f.dest).unwrap();
    let out = blk_search(&f.surface, &basis, f.source, f.dest, &reference).unwrap();
    assert_eq!(out.result.length, tree.distance(f.dest));
    assert!(out.classes.is_empty());
    assert_eq!(out.result.path.nodes().len(), reference.nodes().len());
}

#[test]
fn grouping_survives_a_change_of_basis() {
    for (seed, f) in [(7, tiny_annulus().unwrap()), (11, two_hole().unwrap())] {
        let basis = surface_harmonic_basis(&f.surface).unwrap();
        let rotated = basis.rotated(&random_rotation(basis.dim(), seed)).unwrap();
        let a = table(&f, &basis);
        let b = table(&f, &rotated);
        let members = |t: &ClassTable| {
            let mut v: Vec<(Vec<usize>, usize)> = t
                .classes
                .values()
                .map(|c| {
                    (
                        c.representative.nodes().iter().map(|v| v.index()).collect(),
                        c.member_count,
                    )
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(members(&a), members(&b));
        // Projection distances are basis independent.
        let reps: Vec<&Path> = a.classes.values().map(|c| &c.representative).collect();
        for p in &reps {
            for q in &reps {
                let d = |h: &HarmonicBasis| {
                    let x = path_projection(&f.surface, h, p).unwrap();
                    let y = path_projection(&f.surface, h, q).unwrap();
                    x.values()
                        .iter()
                        .zip(y.values())
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt()
                };
                assert!((d(&basis) - d(&rotated)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn threshold_separates_soft_minimisers() {
    for f in [tiny_annulus().unwrap(), two_hole().unwrap()] {
        let basis = surface_harmonic_basis(&f.surface).unwrap();
        let oracle = table(&f, &basis);
        let longest = oracle
            .classes
            .values()
            .max_by(|a, b| a.shortest_length.total_cmp(&b.shortest_length))
            .unwrap();
        let target = path_projection(&f.surface, &basis, &longest.representative).unwrap();
        let out = blk_search(
            &f.surface,
            &basis,
            f.source,
            f.dest,
            &longest.representative,
        )
        .unwrap();
        let alpha_star = alpha_threshold(&out.classes, out.result.length, &target).unwrap();
        assert!(alpha_star > 0.0);
        let minimiser = |alpha: f64| {
            oracle
                .classes
                .iter()
                .map(|(k, c)| {
                    let diff = c
                        .projection
                        .values()
                        .iter()
                        .zip(target.values())
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    (c.shortest_length + alpha * diff, k.clone())
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap()
                .1
        };
        let target_key = SignatureKey::of(target.values());
        for k in 1..=10 {
            assert_eq!(minimiser(alpha_star * (1.0 + 0.05 * k as f64)), target_key);
        }
        assert_ne!(minimiser(alpha_star * 0.95), target_key);
        assert_eq!(
            path_weight(&f.surface, &out.result.path).unwrap(),
            out.result.length
        );
    }
}
