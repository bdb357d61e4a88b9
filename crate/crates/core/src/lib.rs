//! Adaptive octree mapping and grid path planning.
//!
//! The crate covers the full pipeline from a raw point cloud to a planned path:
//!
//! * [`geometry`]: points, boxes and quickhull.
//! * [`tree`]: the adaptive 2^d-ary tree with MCR-driven depth and dynamic partition.
//! * [`grid`]: fixed and boundary-aligned occupancy rasterization.
//! * [`downsample`]: per-leaf convex-hull downsampling and the voxel-grid baseline.
//! * [`planner`]: jump point search, a Dijkstra reference planner and the
//!   refinement loop that deepens the tree when planning fails.
//! * [`mapgen`]: procedural Perlin and geometric-shape scenes.
//! * [`io`]: cloud, grid, path, mesh and metrics file formats.

pub mod downsample;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod mapgen;
pub mod planner;
pub mod rng;
pub mod tree;

pub use error::{Error, Result};
pub use geometry::{aabb_of, quickhull, Aabb, ConvexHull, Point, PointCloud};
pub use grid::{GridIndex, UniformGridMap};
pub use planner::{GridPath, PlanRequest};
pub use tree::{compute_depth, McrSpec, OctoTree};
