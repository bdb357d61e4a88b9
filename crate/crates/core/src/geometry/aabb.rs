use crate::error::{Error, Result};
use crate::geometry::{Point, PointCloud};

/// Axis-aligned box with `min <= max` on every axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    min: Point,
    max: Point,
}

impl Aabb {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if min.dim() != max.dim() {
            return Err(Error::DimensionMismatch {
                expected: min.dim(),
                got: max.dim(),
            });
        }
        for axis in 0..min.dim() {
            if min[axis] > max[axis] {
                return Err(Error::InvertedBox { axis });
            }
        }
        Ok(Self { min, max })
    }

    /// Box from per-axis `[lo, hi]` slices.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self> {
        Self::new(Point::new(lo)?, Point::new(hi)?)
    }

    /// Degenerate box containing a single point.
    pub fn from_point(p: Point) -> Self {
        Self { min: p, max: p }
    }

    pub fn min(&self) -> &Point {
        &self.min
    }

    pub fn max(&self) -> &Point {
        &self.max
    }

    pub fn dim(&self) -> usize {
        self.min.dim()
    }

    pub fn edge(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn longest_edge(&self) -> f64 {
        (0..self.dim()).map(|a| self.edge(a)).fold(0.0, f64::max)
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; 3];
        for (axis, slot) in c.iter_mut().enumerate().take(self.dim()) {
            *slot = 0.5 * (self.min[axis] + self.max[axis]);
        }
        Point::from_raw(c, self.dim())
    }

    /// Closed containment test.
    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && (0..self.dim()).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    /// Whether `other` lies inside this box (closed).
    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(&other.min) && self.contains(&other.max)
    }

    /// Whether the closed boxes share at least one point.
    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..self.dim()).all(|a| self.min[a] <= other.max[a] && other.min[a] <= self.max[a])
    }

    /// Grow the box to include `p`.
    pub fn expand(&mut self, p: &Point) {
        let mut lo = self.min.xyz_padded();
        let mut hi = self.max.xyz_padded();
        for a in 0..self.dim() {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
        self.min = Point::from_raw(lo, self.dim());
        self.max = Point::from_raw(hi, self.dim());
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        out.expand(&other.min);
        out.expand(&other.max);
        out
    }

    /// Box inflated by `margin` on every side.
    pub fn inflated(&self, margin: f64) -> Aabb {
        let mut lo = self.min.xyz_padded();
        let mut hi = self.max.xyz_padded();
        for a in 0..self.dim() {
            lo[a] -= margin;
            hi[a] += margin;
        }
        Aabb {
            min: Point::from_raw(lo, self.dim()),
            max: Point::from_raw(hi, self.dim()),
        }
    }
}

/// Tight bounds of a non-empty cloud.
pub fn aabb_of(cloud: &PointCloud) -> Result<Aabb> {
    aabb_of_points(cloud.points()).ok_or(Error::EmptyInput { needed: 1, got: 0 })
}

pub(crate) fn aabb_of_points(points: &[Point]) -> Option<Aabb> {
    let (first, rest) = points.split_first()?;
    let mut b = Aabb::from_point(*first);
    for p in rest {
        b.expand(p);
    }
    Some(b)
}
