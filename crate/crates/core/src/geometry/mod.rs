//! Points, boxes and convex hulls.

mod aabb;
mod hull;
mod point;

pub use aabb::{aabb_of, Aabb};
pub use hull::{contains, quickhull, quickhull_points, ConvexHull, HULL_EPSILON};
pub use point::{Point, PointCloud};
