use octogrid::geometry::quickhull_points;
use octogrid::io::{parse_obj, read_binary, read_grid_json, read_xyz, write_binary, write_grid_json, write_obj, write_xyz};
use octogrid::mapgen::{gen_perlin_cloud, gen_shape_cloud, Axis, Perlin, PerlinParams, ShapeKind, ShapeSpec};
use octogrid::{Aabb, Point, PointCloud, UniformGridMap};
use proptest::prelude::*;

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

fn shape() -> impl Strategy<Value = ShapeKind> {
    prop_oneof![
        prop::array::uniform3(0.1f64..5.0).prop_map(|size| ShapeKind::Cuboid { size }),
        (0.1f64..3.0, 0.1f64..5.0).prop_map(|(radius, height)| ShapeKind::Cylinder { radius, height }),
        (0.2f64..3.0, 0.05f64..2.0, 0.1f64..3.0).prop_map(|(inner, band, depth)| ShapeKind::Arch {
            inner_radius: inner,
            outer_radius: inner + band,
            depth,
        }),
        (0.5f64..3.0, 0.2f64..3.0, 0.3f64..4.0, 0.05f64..0.45).prop_map(|(radius, pitch, turns, frac)| {
            ShapeKind::Helix { radius, pitch, turns, tube_radius: frac * radius.min(pitch / 2.0) }
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn perlin_values_in_range(seed in any::<u64>(), x in -1e4f64..1e4, y in -1e4f64..1e4, octaves in 1u32..8, persistence in 0.05f64..=1.0) {
        let n = Perlin::new(seed);
        let v = n.noise(x, y);
        prop_assert!((-1.0..=1.0).contains(&v));
        let f = n.fbm(x, y, octaves, persistence);
        prop_assert!((-1.0..=1.0).contains(&f));
    }

    #[test]
    fn shape_points_on_surface(kind in shape(), axis in axis(), t in prop::array::uniform3(-10.0f64..10.0), seed in any::<u64>()) {
        let mut spec = ShapeSpec::new(kind, t, 1.0).with_axis(axis);
        spec.density = 300.0 / spec.area();
        let cloud = gen_shape_cloud(std::slice::from_ref(&spec), seed).unwrap();
        prop_assert_eq!(cloud.len(), 300);
        for p in &cloud {
            prop_assert!(spec.residual(p) <= 1e-9, "residual {}", spec.residual(p));
        }
    }

    #[test]
    fn cloud_files_round_trip(raw in prop::collection::vec(prop::array::uniform3(any::<f64>().prop_filter("finite", |v| v.is_finite())), 0..100), dim in 2usize..=3) {
        let pts: Vec<Point> = raw
            .iter()
            .map(|c| Point::new(&c[..dim]).unwrap())
            .collect();
        let cloud = PointCloud::from_points(dim, pts).unwrap();
        let mut text = Vec::new();
        write_xyz(&cloud, &mut text).unwrap();
        prop_assert_eq!(&read_xyz(&text[..], dim).unwrap(), &cloud);
        let mut bin = Vec::new();
        write_binary(&cloud, &mut bin).unwrap();
        prop_assert_eq!(&read_binary(&bin[..], dim).unwrap(), &cloud);
    }

    #[test]
    fn grid_json_round_trip(occ in prop::collection::vec(any::<bool>(), 1..200), w in 1usize..20) {
        let h = occ.len().div_ceil(w);
        let mut map = UniformGridMap::new(Point::xy(-1.5, 2.0), &[0.3, 0.7], &[w, h]).unwrap();
        for (l, &o) in occ.iter().enumerate() {
            map.set(&map.index_of(l), o);
        }
        let mut buf = Vec::new();
        write_grid_json(&map, &mut buf).unwrap();
        prop_assert_eq!(read_grid_json(&buf[..]).unwrap(), map);
    }

    #[test]
    fn obj_counts_round_trip(seeds in prop::collection::vec(any::<u64>(), 0..6)) {
        use rand::{Rng, SeedableRng};
        let meshes: Vec<_> = seeds
            .iter()
            .filter_map(|&s| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
                let pts: Vec<Point> = (0..30).map(|_| Point::xyz(rng.gen(), rng.gen(), rng.gen())).collect();
                quickhull_points(&pts).ok()
            })
            .collect();
        let mut buf = Vec::new();
        write_obj(&meshes, &mut buf).unwrap();
        let s = parse_obj(&buf[..]).unwrap();
        prop_assert_eq!(s.groups, meshes.len());
        prop_assert_eq!(s.vertices, meshes.iter().map(|m| m.vertices().len()).sum::<usize>());
        prop_assert_eq!(s.faces, meshes.iter().map(|m| m.faces().len()).sum::<usize>());
    }
}

#[test]
fn generators_are_deterministic() {
    let params = PerlinParams {
        domain: Aabb::from_bounds(&[0.0, 0.0], &[60.0, 40.0]).unwrap(),
        ..PerlinParams::bench_default(3)
    };
    let encode = |c: &PointCloud| {
        let mut buf = Vec::new();
        write_binary(c, &mut buf).unwrap();
        buf
    };
    assert_eq!(encode(&gen_perlin_cloud(&params).unwrap()), encode(&gen_perlin_cloud(&params).unwrap()));
    let scene = octogrid::mapgen::shape_scene(5_000, 0.05);
    assert_eq!(encode(&gen_shape_cloud(&scene, 1).unwrap()), encode(&gen_shape_cloud(&scene, 1).unwrap()));
}

#[test]
fn default_perlin_map_has_about_1_2_million_points() {
    for seed in 0..3 {
        let n = gen_perlin_cloud(&PerlinParams::bench_default(seed)).unwrap().len() as f64;
        assert!((0.8 * 1.2e6..=1.2 * 1.2e6).contains(&n), "seed {seed}: {n} points");
    }
}
