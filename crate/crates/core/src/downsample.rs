//! Per-leaf convex-hull downsampling and the voxel-grid baseline.
//!
//! Each occupied leaf is reduced independently: points strictly inside the
//! polytope spanned by the per-axis extremal points are dropped, the survivors
//! are split into the `2^d` orthants around the leaf center, and only the hull
//! vertices of each orthant are kept. Hull vertices of the leaf are never
//! removed, so the leaf's convex hull is unchanged.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{quickhull_points, Aabb, ConvexHull, Point, PointCloud};
use crate::tree::OctoTree;

/// Indices (into `points`) of the points kept by the convex reduction, ascending.
pub fn convexify_indices(points: &[Point], split: &Aabb) -> Vec<usize> {
    let n = points.len();
    let d = split.dim();
    if n <= 2 * d {
        return (0..n).collect();
    }

    // Every point attaining an axis extreme; exactly 2d points in general position.
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for a in 0..d {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extremal: Vec<usize> = (0..n)
        .filter(|&i| (0..d).any(|a| points[i][a] == lo[a] || points[i][a] == hi[a]))
        .collect();

    let hex_pts: Vec<Point> = extremal.iter().map(|&i| points[i]).collect();
    let (mut keep, survivors): (Vec<usize>, Vec<usize>) = match quickhull_points(&hex_pts) {
        Ok(hex) => (
            hex.source_indices().iter().map(|&k| extremal[k]).collect(),
            (0..n).filter(|&i| !hex.strictly_contains(&points[i])).collect(),
        ),
        Err(_) => (extremal, (0..n).collect()),
    };

    let mid = split.center();
    let mut orthants: Vec<Vec<usize>> = vec![Vec::new(); 1 << d];
    for &i in &survivors {
        let slot = (0..d).fold(0, |s, a| s | (usize::from(points[i][a] >= mid[a]) << a));
        orthants[slot].push(i);
    }

    for members in orthants {
        if members.len() <= d {
            keep.extend_from_slice(&members);
            continue;
        }
        let pts: Vec<Point> = members.iter().map(|&i| points[i]).collect();
        match quickhull_points(&pts) {
            Ok(hull) => keep.extend(hull.source_indices().iter().map(|&k| members[k])),
            Err(_) => keep.extend_from_slice(&members),
        }
    }
    keep.sort_unstable();
    keep.dedup();
    keep
}

/// Retained points of one leaf, in input order.
pub fn convexify_leaf(points: &[Point], split: &Aabb) -> Vec<Point> {
    convexify_indices(points, split)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

/// Output of [`downsample_tree`].
#[derive(Clone, Debug)]
pub struct DownsampleResult {
    pub retained: PointCloud,
    pub input_len: usize,
    /// `retained / input`, defined as 1 for an empty input.
    pub retention_rate: f64,
    /// Hull of each leaf's retained set, in leaf order; degenerate leaves are skipped.
    pub per_leaf_meshes: Vec<ConvexHull>,
    pub elimination_time: Duration,
    pub meshing_time: Duration,
}

impl DownsampleResult {
    pub fn elapsed(&self) -> Duration {
        self.elimination_time + self.meshing_time
    }
}

/// Runs `f` on a pool of `workers` threads (0 = rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Downsamples every occupied leaf of `tree` on `workers` threads.
///
/// Leaves are processed in Morton order and results are assembled in that
/// order, so the output does not depend on the worker count.
pub fn downsample_tree(tree: &OctoTree, workers: usize) -> Result<DownsampleResult> {
    let leaves = tree.occupied_leaves();
    with_workers(workers, || {
        let t0 = Instant::now();
        let kept: Vec<Vec<Point>> = leaves
            .par_iter()
            .map(|leaf| convexify_leaf(tree.node(leaf.id).point_cloud(), &leaf.split_boundary))
            .collect();
        let elimination_time = t0.elapsed();

        let t1 = Instant::now();
        let per_leaf_meshes: Vec<ConvexHull> = kept
            .par_iter()
            .filter_map(|pts| quickhull_points(pts).ok())
            .collect();
        let meshing_time = t1.elapsed();

        let retained: Vec<Point> = kept.into_iter().flatten().collect();
        let input_len = tree.len();
        let retention_rate = if input_len == 0 {
            1.0
        } else {
            retained.len() as f64 / input_len as f64
        };
        DownsampleResult {
            retained: PointCloud::from_points(tree.dim(), retained).expect("dimension preserved"),
            input_len,
            retention_rate,
            per_leaf_meshes,
            elimination_time,
            meshing_time,
        }
    })
}

/// One representative per non-empty voxel: the input point nearest the voxel
/// centroid, ties going to the lowest index. Output keeps input order.
///
/// Voxels are anchored at the coordinate origin.
pub fn voxel_filter(cloud: &PointCloud, voxel_size: f64) -> Result<PointCloud> {
    if !(voxel_size.is_finite() && voxel_size > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "voxel size must be positive, got {voxel_size}"
        )));
    }
    let d = cloud.dim();
    let key = |p: &Point| {
        let mut k = [0i64; 3];
        for (a, slot) in k.iter_mut().enumerate().take(d) {
            *slot = (p[a] / voxel_size).floor() as i64;
        }
        k
    };
    let mut sums: HashMap<[i64; 3], ([f64; 3], usize)> = HashMap::new();
    for p in cloud {
        let e = sums.entry(key(p)).or_insert(([0.0; 3], 0));
        for a in 0..d {
            e.0[a] += p[a];
        }
        e.1 += 1;
    }
    let mut best: HashMap<[i64; 3], (f64, usize)> = HashMap::with_capacity(sums.len());
    for (i, p) in cloud.iter().enumerate() {
        let k = key(p);
        let (sum, count) = sums[&k];
        let dist: f64 = (0..d)
            .map(|a| {
                let c = sum[a] / count as f64;
                (p[a] - c) * (p[a] - c)
            })
            .sum();
        best.entry(k)
            .and_modify(|b| {
                if dist < b.0 {
                    *b = (dist, i);
                }
            })
            .or_insert((dist, i));
    }
    let mut picks: Vec<usize> = best.into_values().map(|(_, i)| i).collect();
    picks.sort_unstable();
    PointCloud::from_points(d, picks.into_iter().map(|i| cloud.points()[i]).collect())
}

/// Voxel size whose [`voxel_filter`] output is closest to `target_fraction` of
/// the input, found by bisection on a logarithmic scale.
pub fn calibrate_voxel_size(cloud: &PointCloud, target_fraction: f64) -> Result<f64> {
    if !(target_fraction > 0.0 && target_fraction <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "target fraction must lie in (0, 1], got {target_fraction}"
        )));
    }
    let bounds = crate::geometry::aabb_of(cloud)?;
    let n = cloud.len() as f64;
    let fraction = |v: f64| voxel_filter(cloud, v).map(|c| c.len() as f64 / n);
    let mut hi = bounds.longest_edge().max(1e-9) * 2.0;
    let mut lo = hi * 1e-9;
    let mut best = (f64::INFINITY, hi);
    for _ in 0..48 {
        let mid = (lo * hi).sqrt();
        let f = fraction(mid)?;
        let err = (f - target_fraction).abs();
        if err < best.0 {
            best = (err, mid);
        }
        if f > target_fraction {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}
