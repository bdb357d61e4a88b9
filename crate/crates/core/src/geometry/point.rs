use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// A 2-D or 3-D point in meters.
///
/// Coordinates are always finite. Unused trailing coordinates of a 2-D point
/// are kept at zero so that `Point` stays `Copy` and allocation free.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    xyz: [f64; 3],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut xyz = [0.0; 3];
        for (slot, &c) in xyz.iter_mut().zip(coords) {
            if !c.is_finite() {
                return Err(Error::NonFinite(c));
            }
            *slot = c;
        }
        Ok(Self { xyz, dim: dim as u8 })
    }

    /// Planar point. Panics on non-finite input.
    pub fn xy(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "non-finite coordinate");
        Self { xyz: [x, y, 0.0], dim: 2 }
    }

    /// Spatial point. Panics on non-finite input.
    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        assert!(
            x.is_finite() && y.is_finite() && z.is_finite(),
            "non-finite coordinate"
        );
        Self { xyz: [x, y, z], dim: 3 }
    }

    pub(crate) fn from_raw(xyz: [f64; 3], dim: usize) -> Self {
        debug_assert!((2..=3).contains(&dim));
        Self { xyz, dim: dim as u8 }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.xyz[..self.dim as usize]
    }

    /// Coordinates padded to three components (z = 0 for planar points).
    #[inline]
    pub fn xyz_padded(&self) -> [f64; 3] {
        self.xyz
    }

    pub fn distance_squared(&self, other: &Point) -> f64 {
        self.xyz
            .iter()
            .zip(other.xyz.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_squared(other).sqrt()
    }

    /// Lexicographic total order on the bit patterns, used for exact deduplication.
    pub(crate) fn total_cmp(&self, other: &Point) -> std::cmp::Ordering {
        self.xyz[0]
            .total_cmp(&other.xyz[0])
            .then(self.xyz[1].total_cmp(&other.xyz[1]))
            .then(self.xyz[2].total_cmp(&other.xyz[2]))
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, axis: usize) -> &f64 {
        &self.coords()[axis]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point{:?}", self.coords())
    }
}

/// An ordered collection of points sharing one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Point>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self {
            dim,
            points: Vec::new(),
        })
    }

    pub fn from_points(dim: usize, points: Vec<Point>) -> Result<Self> {
        let mut cloud = Self::new(dim)?;
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        cloud.points = points;
        Ok(cloud)
    }

    pub fn push(&mut self, p: Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        self.points.push(p);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_bad_dimension() {
        assert!(matches!(
            Point::new(&[1.0, f64::NAN]),
            Err(Error::NonFinite(v)) if v.is_nan()
        ));
        assert!(matches!(
            Point::new(&[1.0]),
            Err(Error::UnsupportedDimension(1))
        ));
        assert!(matches!(
            Point::new(&[0.0, 0.0, f64::INFINITY]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn cloud_enforces_dimension() {
        let mut cloud = PointCloud::new(2).unwrap();
        cloud.push(Point::xy(1.0, 2.0)).unwrap();
        assert!(matches!(
            cloud.push(Point::xyz(1.0, 2.0, 3.0)),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert_eq!(cloud.len(), 1);
        assert_eq!(cloud.points()[0][1], 2.0);
    }
}
