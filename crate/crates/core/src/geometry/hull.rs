//! Quickhull in two and three dimensions.
//!
//! 2-D hulls are returned as a counter-clockwise vertex ring. 3-D hulls carry
//! outward-oriented triangular faces. Exact duplicates are removed before
//! construction; the lowest input index of each duplicate group survives.
//! Affinely dependent inputs are reported as [`Error::DegenerateInput`] rather
//! than producing a lower-dimensional hull.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Point, PointCloud};

/// Absolute half-space tolerance (meters) for hull construction and containment.
pub const HULL_EPSILON: f64 = 1e-9;

type V3 = [f64; 3];

#[inline]
fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

/// Oriented supporting line (2-D) or plane (3-D): `normal . p - offset` is the
/// signed distance, positive outside.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Plane {
    normal: V3,
    offset: f64,
}

impl Plane {
    fn through(normal: V3, on: V3) -> Self {
        Self {
            normal,
            offset: dot(normal, on),
        }
    }

    #[inline]
    fn distance(&self, p: V3) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Convex hull of a point set.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexHull {
    dim: usize,
    vertices: Vec<Point>,
    source: Vec<usize>,
    faces: Vec<[usize; 3]>,
    planes: Vec<Plane>,
}

impl ConvexHull {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Hull vertices. In 2-D these form the counter-clockwise ring; in 3-D
    /// they are sorted by input index.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Input index of every vertex, parallel to [`ConvexHull::vertices`].
    pub fn source_indices(&self) -> &[usize] {
        &self.source
    }

    /// Outward-oriented triangles (3-D only; empty for 2-D hulls).
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Triangles covering the hull surface. 2-D rings are fan-triangulated.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        if self.dim == 3 {
            self.faces.clone()
        } else {
            (1..self.vertices.len().saturating_sub(1))
                .map(|i| [0, i, i + 1])
                .collect()
        }
    }

    /// Inside or on the hull within [`HULL_EPSILON`].
    pub fn contains(&self, p: &Point) -> bool {
        let q = p.xyz_padded();
        self.planes.iter().all(|pl| pl.distance(q) <= HULL_EPSILON)
    }

    /// Strictly inside: more than [`HULL_EPSILON`] behind every supporting plane.
    pub fn strictly_contains(&self, p: &Point) -> bool {
        let q = p.xyz_padded();
        self.planes.iter().all(|pl| pl.distance(q) < -HULL_EPSILON)
    }

    /// Area (2-D) or volume (3-D), signed by face orientation.
    pub fn measure(&self) -> f64 {
        if self.dim == 2 {
            let n = self.vertices.len();
            (0..n)
                .map(|i| {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % n];
                    a[0] * b[1] - b[0] * a[1]
                })
                .sum::<f64>()
                * 0.5
        } else {
            self.faces
                .iter()
                .map(|f| {
                    let [a, b, c] = f.map(|i| self.vertices[i].xyz_padded());
                    dot(a, cross(b, c))
                })
                .sum::<f64>()
                / 6.0
        }
    }
}

/// Free-function form of [`ConvexHull::contains`].
pub fn contains(hull: &ConvexHull, p: &Point) -> bool {
    hull.contains(p)
}

/// Convex hull of a cloud.
pub fn quickhull(cloud: &PointCloud) -> Result<ConvexHull> {
    hull_of(cloud.points(), cloud.dim())
}

/// Convex hull of a point slice; the dimension is taken from the points.
pub fn quickhull_points(points: &[Point]) -> Result<ConvexHull> {
    let dim = points.first().map(|p| p.dim()).unwrap_or(2);
    hull_of(points, dim)
}

fn hull_of(points: &[Point], dim: usize) -> Result<ConvexHull> {
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if points.len() < dim + 1 {
        return Err(Error::EmptyInput {
            needed: dim + 1,
            got: points.len(),
        });
    }
    if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let unique = dedup_indices(points);
    if unique.len() < dim + 1 {
        return Err(Error::DegenerateInput);
    }
    let pts: Vec<V3> = unique.iter().map(|&i| points[i].xyz_padded()).collect();
    if dim == 2 {
        let ring = hull2(&pts)?;
        let source: Vec<usize> = ring.iter().map(|&l| unique[l]).collect();
        let vertices: Vec<Point> = source.iter().map(|&i| points[i]).collect();
        let n = ring.len();
        let planes = (0..n)
            .map(|i| {
                let a = pts[ring[i]];
                let b = pts[ring[(i + 1) % n]];
                let e = sub(b, a);
                let len = norm(e);
                Plane::through([e[1] / len, -e[0] / len, 0.0], a)
            })
            .collect();
        Ok(ConvexHull {
            dim,
            vertices,
            source,
            faces: Vec::new(),
            planes,
        })
    } else {
        let faces_local = hull3(&pts)?;
        let mut used: Vec<usize> = faces_local.iter().flatten().copied().collect();
        used.sort_unstable();
        used.dedup();
        let mut remap = vec![usize::MAX; pts.len()];
        for (new, &old) in used.iter().enumerate() {
            remap[old] = new;
        }
        let source: Vec<usize> = used.iter().map(|&l| unique[l]).collect();
        let vertices: Vec<Point> = source.iter().map(|&i| points[i]).collect();
        let faces: Vec<[usize; 3]> = faces_local.iter().map(|f| f.map(|v| remap[v])).collect();
        let planes = faces_local
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|v| pts[v]);
                let n = cross(sub(b, a), sub(c, a));
                let len = norm(n);
                Plane::through([n[0] / len, n[1] / len, n[2] / len], a)
            })
            .collect();
        Ok(ConvexHull {
            dim,
            vertices,
            source,
            faces,
            planes,
        })
    }
}

/// Indices of the first occurrence of every distinct point, ascending.
fn dedup_indices(points: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].total_cmp(&points[b]).then(a.cmp(&b)));
    let mut keep: Vec<usize> = Vec::with_capacity(order.len());
    for i in order {
        match keep.last() {
            Some(&last) if points[last].total_cmp(&points[i]).is_eq() => {}
            _ => keep.push(i),
        }
    }
    keep.sort_unstable();
    keep
}

// ---------------------------------------------------------------------------
// 2-D

/// Signed distance of `r` to the right of the directed line `p -> q`.
#[inline]
fn right_distance(p: V3, q: V3, r: V3) -> f64 {
    let e = sub(q, p);
    let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
    -(e[0] * (r[1] - p[1]) - e[1] * (r[0] - p[0])) / len
}

fn hull2(pts: &[V3]) -> Result<Vec<usize>> {
    let lex = |a: &V3, b: &V3| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]));
    let mut lo = 0;
    let mut hi = 0;
    for i in 1..pts.len() {
        if lex(&pts[i], &pts[lo]).is_lt() {
            lo = i;
        }
        if lex(&pts[i], &pts[hi]).is_gt() {
            hi = i;
        }
    }
    let all: Vec<usize> = (0..pts.len()).collect();
    let below: Vec<usize> = outside_of(pts, lo, hi, &all);
    let above: Vec<usize> = outside_of(pts, hi, lo, &all);
    if below.is_empty() && above.is_empty() {
        return Err(Error::DegenerateInput);
    }
    let mut ring = vec![lo];
    chain(pts, lo, hi, &below, &mut ring);
    ring.push(hi);
    chain(pts, hi, lo, &above, &mut ring);
    Ok(ring)
}

fn outside_of(pts: &[V3], p: usize, q: usize, set: &[usize]) -> Vec<usize> {
    set.iter()
        .copied()
        .filter(|&r| right_distance(pts[p], pts[q], pts[r]) > HULL_EPSILON)
        .collect()
}

/// Appends the hull vertices strictly right of `p -> q`, ordered from p to q.
fn chain(pts: &[V3], p: usize, q: usize, set: &[usize], out: &mut Vec<usize>) {
    let mut far = None;
    let mut best = f64::NEG_INFINITY;
    for &r in set {
        let d = right_distance(pts[p], pts[q], pts[r]);
        if d > best {
            best = d;
            far = Some(r);
        }
    }
    let Some(c) = far else { return };
    let left = outside_of(pts, p, c, set);
    let right = outside_of(pts, c, q, set);
    chain(pts, p, c, &left, out);
    out.push(c);
    chain(pts, c, q, &right, out);
}

// ---------------------------------------------------------------------------
// 3-D

struct Face {
    v: [usize; 3],
    plane: Plane,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(pts: &[V3], v: [usize; 3]) -> Self {
        let [a, b, c] = v.map(|i| pts[i]);
        let n = cross(sub(b, a), sub(c, a));
        let len = norm(n);
        let normal = if len > 0.0 {
            [n[0] / len, n[1] / len, n[2] / len]
        } else {
            [0.0; 3]
        };
        Self {
            v,
            plane: Plane::through(normal, a),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.v;
        [(a, b), (b, c), (c, a)]
    }
}

fn initial_simplex(pts: &[V3]) -> Result<[usize; 4]> {
    let mut extremes = [0usize; 6];
    for axis in 0..3 {
        for (i, p) in pts.iter().enumerate() {
            if p[axis] < pts[extremes[2 * axis]][axis] {
                extremes[2 * axis] = i;
            }
            if p[axis] > pts[extremes[2 * axis + 1]][axis] {
                extremes[2 * axis + 1] = i;
            }
        }
    }
    let (mut a, mut b, mut best) = (0, 0, -1.0);
    for i in 0..6 {
        for j in i + 1..6 {
            let d = norm(sub(pts[extremes[i]], pts[extremes[j]]));
            if d > best {
                best = d;
                a = extremes[i];
                b = extremes[j];
            }
        }
    }
    if best <= HULL_EPSILON {
        return Err(Error::DegenerateInput);
    }
    let ab = sub(pts[b], pts[a]);
    let ab_len = norm(ab);
    let (mut c, mut best) = (usize::MAX, HULL_EPSILON);
    for (i, p) in pts.iter().enumerate() {
        let d = norm(cross(sub(*p, pts[a]), ab)) / ab_len;
        if d > best {
            best = d;
            c = i;
        }
    }
    if c == usize::MAX {
        return Err(Error::DegenerateInput);
    }
    let base = Face::new(pts, [a, b, c]);
    let (mut d, mut best) = (usize::MAX, HULL_EPSILON);
    for (i, p) in pts.iter().enumerate() {
        let dist = base.plane.distance(*p).abs();
        if dist > best {
            best = dist;
            d = i;
        }
    }
    if d == usize::MAX {
        return Err(Error::DegenerateInput);
    }
    Ok([a, b, c, d])
}

fn hull3(pts: &[V3]) -> Result<Vec<[usize; 3]>> {
    let simplex = initial_simplex(pts)?;
    let mut faces: Vec<Face> = Vec::new();
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();

    for skip in 0..4 {
        let mut tri = [0usize; 3];
        let mut k = 0;
        for (j, &v) in simplex.iter().enumerate() {
            if j != skip {
                tri[k] = v;
                k += 1;
            }
        }
        let mut face = Face::new(pts, tri);
        if face.plane.distance(pts[simplex[skip]]) > 0.0 {
            tri.swap(1, 2);
            face = Face::new(pts, tri);
        }
        let id = faces.len();
        for e in face.edges() {
            edge_owner.insert(e, id);
        }
        faces.push(face);
    }

    let in_simplex = |i: usize| simplex.contains(&i);
    for (i, &p) in pts.iter().enumerate() {
        if in_simplex(i) {
            continue;
        }
        if let Some(f) = best_face(&faces, 0..4, p) {
            faces[f].outside.push(i);
        }
    }

    let mut pending: Vec<usize> = (0..4).rev().collect();
    // 0 = unvisited, 1 = visible, 2 = hidden; indexed by face id, reset per step.
    let mut state: Vec<u8> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();

    while let Some(fid) = pending.pop() {
        if !faces[fid].alive || faces[fid].outside.is_empty() {
            continue;
        }
        let eye = {
            let f = &faces[fid];
            let mut eye = f.outside[0];
            let mut best = f.plane.distance(pts[eye]);
            for &q in &f.outside[1..] {
                let d = f.plane.distance(pts[q]);
                if d > best || (d == best && q < eye) {
                    best = d;
                    eye = q;
                }
            }
            eye
        };
        let eye_pt = pts[eye];

        state.resize(faces.len(), 0);
        let mut visible = Vec::new();
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut stack = vec![fid];
        state[fid] = 1;
        touched.push(fid);
        while let Some(f) = stack.pop() {
            visible.push(f);
            for (a, b) in faces[f].edges() {
                let Some(&g) = edge_owner.get(&(b, a)) else {
                    continue;
                };
                match state[g] {
                    1 => {}
                    2 => horizon.push((a, b)),
                    _ => {
                        touched.push(g);
                        if faces[g].plane.distance(eye_pt) > HULL_EPSILON {
                            state[g] = 1;
                            stack.push(g);
                        } else {
                            state[g] = 2;
                            horizon.push((a, b));
                        }
                    }
                }
            }
        }
        for &t in &touched {
            state[t] = 0;
        }
        touched.clear();

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            for e in faces[f].edges() {
                if edge_owner.get(&e) == Some(&f) {
                    edge_owner.remove(&e);
                }
            }
            orphans.extend(faces[f].outside.drain(..).filter(|&q| q != eye));
        }

        let first_new = faces.len();
        for (a, b) in horizon {
            let face = Face::new(pts, [a, b, eye]);
            let id = faces.len();
            for e in face.edges() {
                edge_owner.insert(e, id);
            }
            faces.push(face);
        }
        let new_range = first_new..faces.len();
        for q in orphans {
            if let Some(f) = best_face(&faces, new_range.clone(), pts[q]) {
                faces[f].outside.push(q);
            }
        }
        for id in new_range.rev() {
            if !faces[id].outside.is_empty() {
                pending.push(id);
            }
        }
    }

    Ok(faces.iter().filter(|f| f.alive).map(|f| f.v).collect())
}

fn best_face(faces: &[Face], range: std::ops::Range<usize>, p: V3) -> Option<usize> {
    let mut best = HULL_EPSILON;
    let mut out = None;
    for id in range {
        let d = faces[id].plane.distance(p);
        if d > best {
            best = d;
            out = Some(id);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square_with_center() -> PointCloud {
        let pts = vec![
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 0.0),
            Point::xy(1.0, 1.0),
            Point::xy(0.0, 1.0),
            Point::xy(0.5, 0.5),
        ];
        PointCloud::from_points(2, pts).unwrap()
    }

    fn cube_with_center() -> PointCloud {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Point::xyz(
                (i & 1) as f64,
                ((i >> 1) & 1) as f64,
                ((i >> 2) & 1) as f64,
            ));
        }
        pts.push(Point::xyz(0.5, 0.5, 0.5));
        PointCloud::from_points(3, pts).unwrap()
    }

    #[test]
    fn unit_square_excludes_center() {
        let hull = quickhull(&square_with_center()).unwrap();
        let mut src = hull.source_indices().to_vec();
        src.sort_unstable();
        assert_eq!(src, vec![0, 1, 2, 3]);
        assert!((hull.measure() - 1.0).abs() < 1e-12, "ring must be CCW");
    }

    #[test]
    fn cube_has_eight_vertices_twelve_faces() {
        let hull = quickhull(&cube_with_center()).unwrap();
        assert_eq!(hull.source_indices(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(hull.faces().len(), 12);
        assert!((hull.measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn containment_examples() {
        let hull = quickhull(&square_with_center()).unwrap();
        assert!(contains(&hull, &Point::xy(0.5, 0.5)));
        assert!(contains(&hull, &Point::xy(1.0, 0.5)));
        assert!(!contains(&hull, &Point::xy(2.0, 0.0)));
        assert!(!hull.strictly_contains(&Point::xy(1.0, 0.5)));
        assert!(hull.strictly_contains(&Point::xy(0.25, 0.5)));
    }

    #[test]
    fn degenerate_and_small_inputs() {
        let line: Vec<Point> = (0..5).map(|i| Point::xy(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(quickhull_points(&line).unwrap_err(), Error::DegenerateInput);

        let plane: Vec<Point> = (0..9)
            .map(|i| Point::xyz((i % 3) as f64, (i / 3) as f64, 1.0))
            .collect();
        assert_eq!(quickhull_points(&plane).unwrap_err(), Error::DegenerateInput);

        let two = vec![Point::xy(0.0, 0.0), Point::xy(1.0, 1.0)];
        assert!(matches!(
            quickhull_points(&two),
            Err(Error::EmptyInput { needed: 3, got: 2 })
        ));

        let dupes = vec![Point::xyz(1.0, 1.0, 1.0); 6];
        assert_eq!(quickhull_points(&dupes).unwrap_err(), Error::DegenerateInput);
    }

    #[test]
    fn duplicates_keep_lowest_index() {
        let mut pts = square_with_center().into_points();
        pts.insert(0, Point::xy(1.0, 1.0));
        let hull = quickhull_points(&pts).unwrap();
        let mut src = hull.source_indices().to_vec();
        src.sort_unstable();
        assert_eq!(src, vec![0, 1, 2, 4]);
    }

    #[test]
    fn collinear_boundary_points_are_not_vertices() {
        let mut pts = square_with_center().into_points();
        pts.push(Point::xy(0.5, 0.0));
        let hull = quickhull_points(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 4);
    }

    #[test]
    fn random_sphere_points_are_all_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point> = (0..300)
            .map(|_| {
                let z: f64 = rng.gen_range(-1.0..1.0);
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (1.0 - z * z).sqrt();
                Point::xyz(r * t.cos(), r * t.sin(), z)
            })
            .collect();
        let hull = quickhull_points(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 300);
        // Euler: a triangulated sphere with V vertices has 2V - 4 faces.
        assert_eq!(hull.faces().len(), 2 * 300 - 4);
        assert!(hull.measure() > 0.0);
    }
}
