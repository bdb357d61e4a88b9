//! Fixtures shared by the benchmarks.

use octogrid::grid::rasterize_fixed;
use octogrid::mapgen::{gen_perlin_cloud, gen_shape_cloud, place_start_goal, shape_scene, PerlinParams};
use octogrid::{Aabb, PlanRequest, PointCloud, UniformGridMap};

/// Shape scene with roughly `points` samples and a 5 cm shell.
pub fn scene_cloud(points: usize) -> PointCloud {
    gen_shape_cloud(&shape_scene(points, 0.05), 1).expect("valid scene")
}

/// Default benchmark Perlin map, thinned to `samples_per_meter`.
pub fn perlin_cloud(seed: u64, samples_per_meter: f64) -> (PointCloud, Aabb) {
    let params = PerlinParams {
        samples_per_meter,
        ..PerlinParams::bench_default(seed)
    };
    (gen_perlin_cloud(&params).expect("valid params"), params.domain)
}

/// A solvable planning instance on a fixed Perlin grid, searching seeds upward from `seed`.
pub fn planning_instance(seed: u64, cell: f64) -> (UniformGridMap, PlanRequest) {
    (seed..)
        .find_map(|s| {
            let (cloud, domain) = perlin_cloud(s, 3.0);
            let map = rasterize_fixed(&cloud, &domain, cell).ok()?;
            let (a, b) = place_start_goal(&map, s, 150.0, 200)?;
            let req = PlanRequest::new(a, b);
            octogrid::planner::jps_plan(&map, &req).ok()??;
            Some((map, req))
        })
        .expect("some seed is solvable")
}
