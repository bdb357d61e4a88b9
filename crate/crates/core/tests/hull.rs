mod common;

use std::collections::BTreeSet;

use common::{brute_force_faces, faces_volume, inside_faces};
use octogrid::geometry::{quickhull_points, HULL_EPSILON};
use octogrid::Point;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cube_points(seed: u64, n: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Point::xyz(rng.gen(), rng.gen(), rng.gen())).collect()
}

#[test]
fn vertices_match_brute_force_extreme_points() {
    let pts = random_cube_points(2024, 200);
    let faces = brute_force_faces(&pts);
    let expected: BTreeSet<usize> = faces.iter().flatten().copied().collect();
    let hull = quickhull_points(&pts).unwrap();
    let got: BTreeSet<usize> = hull.source_indices().iter().copied().collect();
    assert_eq!(got, expected);
    assert_eq!(hull.faces().len(), faces.len());
}

#[test]
fn containment_matches_face_half_spaces() {
    let pts = random_cube_points(99, 60);
    let faces = brute_force_faces(&pts);
    let hull = quickhull_points(&pts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut checked = 0;
    while checked < 50 {
        let q = Point::xyz(
            rng.gen_range(-0.2..1.2),
            rng.gen_range(-0.2..1.2),
            rng.gen_range(-0.2..1.2),
        );
        // Skip probes too close to the surface for an unambiguous verdict.
        if inside_faces(&pts, &faces, &q, 1e-6) != inside_faces(&pts, &faces, &q, -1e-6) {
            continue;
        }
        assert_eq!(hull.contains(&q), inside_faces(&pts, &faces, &q, HULL_EPSILON), "{q:?}");
        checked += 1;
    }
}

#[test]
fn small_hull_volume_matches_brute_force() {
    for seed in 0..20 {
        let pts = random_cube_points(seed, 8 + seed as usize % 13);
        let hull = quickhull_points(&pts).unwrap();
        let expected = faces_volume(&pts, &brute_force_faces(&pts));
        assert!(hull.measure() > 0.0);
        assert!((hull.measure() - expected).abs() < 1e-12, "seed {seed}");
    }
}

fn points_strategy(dim: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), 4..40)
        .prop_map(|v| v.iter().map(|c| Point::new(c).unwrap()).collect())
}

fn vertex_keys(pts: &[Point]) -> BTreeSet<[u64; 3]> {
    pts.iter().map(|p| p.xyz_padded().map(f64::to_bits)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hull_invariants(dim in 2usize..=3, seed in any::<u64>(), n in 4usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
                Point::new(&c).unwrap()
            })
            .collect();
        let hull = quickhull_points(&pts);
        prop_assume!(hull.is_ok());
        let hull = hull.unwrap();

        // Containment completeness.
        for p in &pts {
            prop_assert!(hull.contains(p));
        }
        // Idempotence.
        let again = quickhull_points(hull.vertices()).unwrap();
        prop_assert_eq!(vertex_keys(again.vertices()), vertex_keys(hull.vertices()));
        // Minimality.
        for (i, v) in hull.vertices().iter().enumerate() {
            let rest: Vec<Point> = hull
                .vertices()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| *p)
                .collect();
            if let Ok(smaller) = quickhull_points(&rest) {
                prop_assert!(!smaller.contains(v));
            }
        }
        // Orientation.
        prop_assert!(hull.measure() > 0.0);
        for f in hull.faces() {
            prop_assert!(f.iter().all(|&k| k < hull.vertices().len()));
        }
    }

    #[test]
    fn arbitrary_clouds_never_panic(pts in points_strategy(3)) {
        if let Ok(h) = quickhull_points(&pts) {
            prop_assert!(pts.iter().all(|p| h.contains(p)));
        }
    }
}
