//! Procedural test scenes.
//!
//! * 2-D obstacle fields thresholded from multi-octave Perlin noise.
//! * 3-D surface samples of cuboids, cylinders, arches and helices.
//! * Random start/goal placement on a rasterized map.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point, PointCloud};
use crate::grid::{GridIndex, UniformGridMap};
use crate::rng::{derive_seed, splitmix64};

/// Classic 2-D gradient noise with a seeded permutation table.
#[derive(Clone)]
pub struct Perlin {
    perm: [u8; 512],
}

impl Perlin {
    pub fn new(seed: u64) -> Self {
        let mut table: [u8; 256] = std::array::from_fn(|i| i as u8);
        let mut state = seed;
        for i in (1..256).rev() {
            let j = (splitmix64(&mut state) % (i as u64 + 1)) as usize;
            table.swap(i, j);
        }
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = table[i & 255];
        }
        Self { perm }
    }

    /// Single-octave noise in `[-1, 1]`, zero at integer lattice points.
    pub fn noise(&self, x: f64, y: f64) -> f64 {
        let xf = x.floor();
        let yf = y.floor();
        let xi = (xf as i64 & 255) as usize;
        let yi = (yf as i64 & 255) as usize;
        let (x, y) = (x - xf, y - yf);
        let (u, v) = (fade(x), fade(y));
        let p = &self.perm;
        let aa = p[p[xi] as usize + yi];
        let ab = p[p[xi] as usize + yi + 1];
        let ba = p[p[xi + 1] as usize + yi];
        let bb = p[p[xi + 1] as usize + yi + 1];
        let x1 = lerp(u, grad(aa, x, y), grad(ba, x - 1.0, y));
        let x2 = lerp(u, grad(ab, x, y - 1.0), grad(bb, x - 1.0, y - 1.0));
        lerp(v, x1, x2).clamp(-1.0, 1.0)
    }

    /// Octave sum normalized by the total amplitude, so the result stays in `[-1, 1]`.
    pub fn fbm(&self, x: f64, y: f64, octaves: u32, persistence: f64) -> f64 {
        let mut sum = 0.0;
        let mut norm = 0.0;
        let mut amp = 1.0;
        let mut freq = 1.0;
        for _ in 0..octaves {
            sum += amp * self.noise(x * freq, y * freq);
            norm += amp;
            amp *= persistence;
            freq *= 2.0;
        }
        (sum / norm).clamp(-1.0, 1.0)
    }
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

fn grad(hash: u8, x: f64, y: f64) -> f64 {
    match hash & 7 {
        0 => x + y,
        1 => -x + y,
        2 => x - y,
        3 => -x - y,
        4 => x,
        5 => -x,
        6 => y,
        _ => -y,
    }
}

/// Parameters of a thresholded Perlin obstacle field.
#[derive(Clone, Debug, PartialEq)]
pub struct PerlinParams {
    pub seed: u64,
    /// 2-D extent of the map.
    pub domain: Aabb,
    /// Base frequency in cycles per meter.
    pub frequency: f64,
    pub octaves: u32,
    pub persistence: f64,
    /// Samples with noise at or above this value become obstacle points.
    pub threshold: f64,
    pub samples_per_meter: f64,
}

impl PerlinParams {
    /// Default benchmark scene on a 200 m by 150 m map.
    pub fn bench_default(seed: u64) -> Self {
        Self {
            seed,
            domain: Aabb::from_bounds(&[0.0, 0.0], &[200.0, 150.0]).expect("valid box"),
            frequency: 0.03,
            octaves: 4,
            persistence: 0.5,
            threshold: 0.07,
            samples_per_meter: 11.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.domain.dim() != 2 {
            return Err(Error::NotPlanar(self.domain.dim()));
        }
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return bad("frequency must be positive");
        }
        if self.octaves == 0 {
            return bad("octaves must be at least 1");
        }
        if !(self.persistence > 0.0 && self.persistence <= 1.0) {
            return bad("persistence must lie in (0, 1]");
        }
        if !self.threshold.is_finite() {
            return bad("threshold must be finite");
        }
        if !(self.samples_per_meter.is_finite() && self.samples_per_meter > 0.0) {
            return bad("samples_per_meter must be positive");
        }
        Ok(())
    }

    /// Lattice sample counts per axis.
    pub fn lattice(&self) -> [usize; 2] {
        [0, 1].map(|a| (self.domain.edge(a) * self.samples_per_meter).floor() as usize)
    }
}

/// Points at every lattice sample whose noise reaches the threshold.
///
/// Samples sit at cell centers of a lattice with spacing `1 / samples_per_meter`.
pub fn gen_perlin_cloud(params: &PerlinParams) -> Result<PointCloud> {
    params.validate()?;
    let noise = Perlin::new(params.seed);
    let [nx, ny] = params.lattice();
    let step = 1.0 / params.samples_per_meter;
    let (x0, y0) = (params.domain.min()[0], params.domain.min()[1]);
    let mut points = Vec::new();
    for j in 0..ny {
        let y = y0 + (j as f64 + 0.5) * step;
        for i in 0..nx {
            let x = x0 + (i as f64 + 0.5) * step;
            let v = noise.fbm(
                x * params.frequency,
                y * params.frequency,
                params.octaves,
                params.persistence,
            );
            if v >= params.threshold {
                points.push(Point::xy(x, y));
            }
        }
    }
    PointCloud::from_points(2, points)
}

/// World axis that a shape's local z axis is mapped to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Axis {
    X,
    Y,
    #[default]
    Z,
}

impl Axis {
    /// Cyclic permutation of local `(x, y, z)` into world coordinates.
    fn apply(self, v: [f64; 3]) -> [f64; 3] {
        match self {
            Axis::Z => v,
            Axis::X => [v[2], v[0], v[1]],
            Axis::Y => [v[1], v[2], v[0]],
        }
    }

    fn invert(self, w: [f64; 3]) -> [f64; 3] {
        match self {
            Axis::Z => w,
            Axis::X => [w[1], w[2], w[0]],
            Axis::Y => [w[2], w[0], w[1]],
        }
    }
}

/// Shape geometry in its local frame.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeKind {
    /// Box centered at the local origin.
    Cuboid { size: [f64; 3] },
    /// Closed cylinder around local z, from `z = 0` to `z = height`.
    Cylinder { radius: f64, height: f64 },
    /// Half annulus in the local xz plane (z >= 0) extruded along y over
    /// `[-depth / 2, depth / 2]`.
    Arch {
        inner_radius: f64,
        outer_radius: f64,
        depth: f64,
    },
    /// Open tube of radius `tube_radius` around the helix
    /// `(r cos t, r sin t, pitch * t / 2π)`, `t` in `[0, 2π * turns]`.
    Helix {
        radius: f64,
        pitch: f64,
        turns: f64,
        tube_radius: f64,
    },
}

/// A shape placed in the world and sampled on its surface.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub translation: [f64; 3],
    pub axis: Axis,
    /// Points per square meter of surface.
    pub density: f64,
    /// Width of the uniform offset band along the surface normal; 0 keeps
    /// samples exactly on the surface.
    pub thickness: f64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, translation: [f64; 3], density: f64) -> Self {
        Self {
            kind,
            translation,
            axis: Axis::Z,
            density,
            thickness: 0.0,
        }
    }

    pub fn with_axis(mut self, axis: Axis) -> Self {
        self.axis = axis;
        self
    }

    pub fn with_thickness(mut self, thickness: f64) -> Self {
        self.thickness = thickness;
        self
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        pos(self.density, "density")?;
        if !(self.thickness.is_finite() && self.thickness >= 0.0) {
            return Err(format!("thickness must be non-negative, got {}", self.thickness));
        }
        if self.translation.iter().any(|t| !t.is_finite()) {
            return Err("translation must be finite".into());
        }
        match &self.kind {
            ShapeKind::Cuboid { size } => {
                for &s in size {
                    pos(s, "cuboid size")?;
                }
            }
            ShapeKind::Cylinder { radius, height } => {
                pos(*radius, "radius")?;
                pos(*height, "height")?;
            }
            ShapeKind::Arch {
                inner_radius,
                outer_radius,
                depth,
            } => {
                pos(*inner_radius, "inner radius")?;
                pos(*depth, "depth")?;
                if !(outer_radius > inner_radius && outer_radius.is_finite()) {
                    return Err("outer radius must exceed inner radius".into());
                }
            }
            ShapeKind::Helix {
                radius,
                pitch,
                turns,
                tube_radius,
            } => {
                pos(*radius, "radius")?;
                pos(*pitch, "pitch")?;
                pos(*turns, "turns")?;
                pos(*tube_radius, "tube radius")?;
                if tube_radius >= radius {
                    return Err("tube radius must be below the helix radius".into());
                }
                if 2.0 * tube_radius >= *pitch {
                    return Err("tube radius must be below half the pitch".into());
                }
            }
        }
        Ok(())
    }

    /// Surface area of the local shape.
    pub fn area(&self) -> f64 {
        self.patches().iter().map(|p| p.area()).sum()
    }

    fn patches(&self) -> Vec<Patch> {
        match self.kind {
            ShapeKind::Cuboid { size } => {
                let h = size.map(|s| s / 2.0);
                let mut out = Vec::new();
                for a in 0..3 {
                    for sign in [-1.0, 1.0] {
                        out.push(Patch::BoxFace { half: h, axis: a, sign });
                    }
                }
                out
            }
            ShapeKind::Cylinder { radius, height } => vec![
                Patch::Lateral { radius, height },
                Patch::Disk { radius, z: 0.0, sign: -1.0 },
                Patch::Disk { radius, z: height, sign: 1.0 },
            ],
            ShapeKind::Arch {
                inner_radius,
                outer_radius,
                depth,
            } => vec![
                Patch::HalfShell { radius: outer_radius, depth, outward: 1.0 },
                Patch::HalfShell { radius: inner_radius, depth, outward: -1.0 },
                Patch::HalfRing { inner: inner_radius, outer: outer_radius, y: depth / 2.0, sign: 1.0 },
                Patch::HalfRing { inner: inner_radius, outer: outer_radius, y: -depth / 2.0, sign: -1.0 },
                Patch::Footing { inner: inner_radius, outer: outer_radius, depth, side: -1.0 },
                Patch::Footing { inner: inner_radius, outer: outer_radius, depth, side: 1.0 },
            ],
            ShapeKind::Helix {
                radius,
                pitch,
                turns,
                tube_radius,
            } => vec![Patch::Tube {
                radius,
                pitch,
                turns,
                tube: tube_radius,
            }],
        }
    }

    /// Signed-free surface residual of a world-space point: zero on the
    /// surface (for zero thickness), positive off it.
    pub fn residual(&self, p: &Point) -> f64 {
        let w = p.xyz_padded();
        let local = self
            .axis
            .invert([0, 1, 2].map(|a| w[a] - self.translation[a]));
        let [x, y, z] = local;
        match self.kind {
            ShapeKind::Cuboid { size } => (0..3)
                .map(|a| local[a].abs() - size[a] / 2.0)
                .fold(f64::NEG_INFINITY, f64::max)
                .abs(),
            ShapeKind::Cylinder { radius, height } => {
                let rho = x.hypot(y);
                let side = (rho - radius).abs() + outside(z, 0.0, height);
                let bottom = z.abs() + (rho - radius).max(0.0);
                let top = (z - height).abs() + (rho - radius).max(0.0);
                side.min(bottom).min(top)
            }
            ShapeKind::Arch {
                inner_radius,
                outer_radius,
                depth,
            } => {
                let rho = x.hypot(z);
                let hd = depth / 2.0;
                let shell = |r: f64| (rho - r).abs() + outside(y, -hd, hd) + (-z).max(0.0);
                let band = outside(rho, inner_radius, outer_radius) + (-z).max(0.0);
                let ends = (y.abs() - hd).abs() + band;
                let foot = z.abs() + outside(x.abs(), inner_radius, outer_radius) + outside(y, -hd, hd);
                shell(outer_radius)
                    .min(shell(inner_radius))
                    .min(ends)
                    .min(foot)
            }
            ShapeKind::Helix {
                radius,
                pitch,
                turns,
                tube_radius,
            } => (helix_centerline_distance(local, radius, pitch, turns) - tube_radius).abs(),
        }
    }
}

fn outside(v: f64, lo: f64, hi: f64) -> f64 {
    (lo - v).max(0.0) + (v - hi).max(0.0)
}

fn helix_point(t: f64, radius: f64, pitch: f64) -> [f64; 3] {
    [radius * t.cos(), radius * t.sin(), pitch * t / TAU]
}

/// Distance from `p` to the helix centerline, by dense sampling and
/// golden-section refinement of the parameter.
fn helix_centerline_distance(p: [f64; 3], radius: f64, pitch: f64, turns: f64) -> f64 {
    let t_max = TAU * turns;
    let d2 = |t: f64| {
        let c = helix_point(t, radius, pitch);
        (0..3).map(|a| (p[a] - c[a]).powi(2)).sum::<f64>()
    };
    let samples = (turns * 256.0).ceil() as usize;
    let dt = t_max / samples as f64;
    let (mut best_t, mut best) = (0.0, d2(0.0));
    for i in 1..=samples {
        let t = i as f64 * dt;
        let v = d2(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let (mut a, mut b) = ((best_t - dt).max(0.0), (best_t + dt).min(t_max));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if d2(c) < d2(d) {
            b = d;
        } else {
            a = c;
        }
    }
    d2(0.5 * (a + b)).min(best).sqrt()
}

/// One parameterized surface piece in the local frame.
#[derive(Clone, Copy, Debug)]
enum Patch {
    BoxFace { half: [f64; 3], axis: usize, sign: f64 },
    Lateral { radius: f64, height: f64 },
    Disk { radius: f64, z: f64, sign: f64 },
    HalfShell { radius: f64, depth: f64, outward: f64 },
    HalfRing { inner: f64, outer: f64, y: f64, sign: f64 },
    Footing { inner: f64, outer: f64, depth: f64, side: f64 },
    Tube { radius: f64, pitch: f64, turns: f64, tube: f64 },
}

impl Patch {
    fn area(&self) -> f64 {
        match *self {
            Patch::BoxFace { half, axis, .. } => {
                4.0 * half[(axis + 1) % 3] * half[(axis + 2) % 3]
            }
            Patch::Lateral { radius, height } => TAU * radius * height,
            Patch::Disk { radius, .. } => PI * radius * radius,
            Patch::HalfShell { radius, depth, .. } => PI * radius * depth,
            Patch::HalfRing { inner, outer, .. } => 0.5 * PI * (outer * outer - inner * inner),
            Patch::Footing { inner, outer, depth, .. } => (outer - inner) * depth,
            Patch::Tube { radius, pitch, turns, tube } => {
                TAU * tube * turns * (TAU * radius).hypot(pitch)
            }
        }
    }

    /// Uniform surface sample and its unit normal.
    fn sample(&self, rng: &mut ChaCha8Rng) -> ([f64; 3], [f64; 3]) {
        match *self {
            Patch::BoxFace { half, axis, sign } => {
                let mut p = [0.0; 3];
                let mut n = [0.0; 3];
                p[axis] = sign * half[axis];
                n[axis] = sign;
                for a in [(axis + 1) % 3, (axis + 2) % 3] {
                    p[a] = rng.gen_range(-half[a]..=half[a]);
                }
                (p, n)
            }
            Patch::Lateral { radius, height } => {
                let t = rng.gen_range(0.0..TAU);
                let (s, c) = t.sin_cos();
                ([radius * c, radius * s, rng.gen_range(0.0..=height)], [c, s, 0.0])
            }
            Patch::Disk { radius, z, sign } => {
                let r = radius * rng.gen::<f64>().sqrt();
                let t = rng.gen_range(0.0..TAU);
                let (s, c) = t.sin_cos();
                ([r * c, r * s, z], [0.0, 0.0, sign])
            }
            Patch::HalfShell { radius, depth, outward } => {
                let t = rng.gen_range(0.0..=PI);
                let (s, c) = t.sin_cos();
                let y = rng.gen_range(-depth / 2.0..=depth / 2.0);
                ([radius * c, y, radius * s], [outward * c, 0.0, outward * s])
            }
            Patch::HalfRing { inner, outer, y, sign } => {
                // Area-uniform radius on the annulus.
                let u: f64 = rng.gen();
                let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
                let t = rng.gen_range(0.0..=PI);
                let (s, c) = t.sin_cos();
                ([r * c, y, r * s], [0.0, sign, 0.0])
            }
            Patch::Footing { inner, outer, depth, side } => {
                let x = side * rng.gen_range(inner..=outer);
                let y = rng.gen_range(-depth / 2.0..=depth / 2.0);
                ([x, y, 0.0], [0.0, 0.0, -1.0])
            }
            Patch::Tube { radius, pitch, turns, tube } => {
                let t = rng.gen_range(0.0..=TAU * turns);
                let phi = rng.gen_range(0.0..TAU);
                let c = helix_point(t, radius, pitch);
                // Frenet frame of the helix: N points to the axis, B = T x N.
                let k = pitch / TAU;
                let len = radius.hypot(k);
                let (st, ct) = t.sin_cos();
                let tangent = [-radius * st / len, radius * ct / len, k / len];
                let normal = [-ct, -st, 0.0];
                let bin = [
                    tangent[1] * normal[2] - tangent[2] * normal[1],
                    tangent[2] * normal[0] - tangent[0] * normal[2],
                    tangent[0] * normal[1] - tangent[1] * normal[0],
                ];
                let (sp, cp) = phi.sin_cos();
                let dir: [f64; 3] = std::array::from_fn(|a| cp * normal[a] + sp * bin[a]);
                (std::array::from_fn(|a| c[a] + tube * dir[a]), dir)
            }
        }
    }
}

/// Surface samples of every shape, in input order.
///
/// Each shape draws `round(area * density)` points from its own stream
/// derived from `(seed, shape index)`.
pub fn gen_shape_cloud(specs: &[ShapeSpec], seed: u64) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (index, spec) in specs.iter().enumerate() {
        spec.validate()
            .map_err(|reason| Error::InvalidShape { index, reason })?;
        let patches = spec.patches();
        let areas: Vec<f64> = patches.iter().map(Patch::area).collect();
        let total: f64 = areas.iter().sum();
        let count = (total * spec.density).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));
        for _ in 0..count {
            let mut pick = rng.gen_range(0.0..total);
            let mut which = patches.len() - 1;
            for (i, a) in areas.iter().enumerate() {
                if pick < *a {
                    which = i;
                    break;
                }
                pick -= a;
            }
            let (mut p, n) = patches[which].sample(&mut rng);
            if spec.thickness > 0.0 {
                let off = rng.gen_range(-0.5..=0.5) * spec.thickness;
                for a in 0..3 {
                    p[a] += off * n[a];
                }
            }
            let w = spec.axis.apply(p);
            points.push(Point::xyz(
                w[0] + spec.translation[0],
                w[1] + spec.translation[1],
                w[2] + spec.translation[2],
            ));
        }
    }
    PointCloud::from_points(3, points)
}

/// Domain of [`shape_scene`]: a 24 m by 24 m by 12 m box.
pub fn shape_scene_domain() -> Aabb {
    Aabb::from_bounds(&[0.0, 0.0, 0.0], &[24.0, 24.0, 12.0]).expect("valid box")
}

/// Fixed four-shape scene (cuboid, cylinder, arch, helix) with roughly
/// `points` samples in total, spread evenly over the combined surface.
pub fn shape_scene(points: usize, thickness: f64) -> Vec<ShapeSpec> {
    let mut specs = vec![
        ShapeSpec::new(ShapeKind::Cuboid { size: [5.0, 4.0, 3.0] }, [5.0, 5.0, 1.6], 1.0),
        ShapeSpec::new(ShapeKind::Cylinder { radius: 2.0, height: 7.0 }, [17.0, 6.0, 0.5], 1.0),
        ShapeSpec::new(
            ShapeKind::Arch {
                inner_radius: 3.0,
                outer_radius: 4.5,
                depth: 2.5,
            },
            [6.5, 17.0, 0.5],
            1.0,
        ),
        ShapeSpec::new(
            ShapeKind::Helix {
                radius: 2.5,
                pitch: 2.0,
                turns: 4.0,
                tube_radius: 0.5,
            },
            [17.5, 17.0, 1.0],
            1.0,
        ),
    ];
    let area: f64 = specs.iter().map(ShapeSpec::area).sum();
    let density = points as f64 / area;
    for s in &mut specs {
        s.density = density;
        s.thickness = thickness;
    }
    specs
}

/// Picks a free start cell and a free goal cell whose centers are at least
/// `min_separation` meters apart, trying up to `attempts` start cells.
pub fn place_start_goal(
    map: &UniformGridMap,
    seed: u64,
    min_separation: f64,
    attempts: usize,
) -> Option<(GridIndex, GridIndex)> {
    let free: Vec<usize> = map
        .occupancy()
        .iter()
        .enumerate()
        .filter_map(|(i, &o)| (!o).then_some(i))
        .collect();
    if free.is_empty() {
        return None;
    }
    let centers: Vec<Point> = free.iter().map(|&i| map.cell_center(&map.index_of(i))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let s = rng.gen_range(0..free.len());
        let far: Vec<usize> = (0..free.len())
            .filter(|&g| centers[s].distance(&centers[g]) >= min_separation)
            .collect();
        if far.is_empty() {
            continue;
        }
        let g = far[rng.gen_range(0..far.len())];
        return Some((map.index_of(free[s]), map.index_of(free[g])));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(threshold: f64) -> PerlinParams {
        PerlinParams {
            domain: Aabb::from_bounds(&[0.0, 0.0], &[20.0, 10.0]).unwrap(),
            threshold,
            samples_per_meter: 2.0,
            ..PerlinParams::bench_default(7)
        }
    }

    #[test]
    fn threshold_extremes() {
        let all = gen_perlin_cloud(&small(-1.0)).unwrap();
        assert_eq!(all.len(), 40 * 20);
        let none = gen_perlin_cloud(&small(1.0 + 1e-12)).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn perlin_is_deterministic_and_seeded() {
        let a = gen_perlin_cloud(&small(0.0)).unwrap();
        let b = gen_perlin_cloud(&small(0.0)).unwrap();
        assert_eq!(a, b);
        let c = gen_perlin_cloud(&PerlinParams { seed: 8, ..small(0.0) }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_range() {
        let n = Perlin::new(1);
        let mut lo: f64 = 0.0;
        let mut hi: f64 = 0.0;
        for i in 0..200 {
            for j in 0..200 {
                let v = n.noise(i as f64 * 0.173, j as f64 * 0.091);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        assert!(lo >= -1.0 && hi <= 1.0);
        assert!(hi - lo > 0.5, "noise should not be flat");
        assert_eq!(n.noise(3.0, 4.0), 0.0);
    }

    #[test]
    fn unit_cuboid_count_and_residual() {
        let spec = ShapeSpec::new(ShapeKind::Cuboid { size: [1.0; 3] }, [0.5; 3], 100.0);
        let cloud = gen_shape_cloud(std::slice::from_ref(&spec), 1).unwrap();
        assert_eq!(cloud.len(), 600);
        assert!(cloud.iter().all(|p| spec.residual(p) <= 1e-9));
    }

    #[test]
    fn cylinder_points_on_surface() {
        let spec = ShapeSpec::new(ShapeKind::Cylinder { radius: 1.0, height: 2.0 }, [0.0; 3], 50.0)
            .with_axis(Axis::X);
        let cloud = gen_shape_cloud(std::slice::from_ref(&spec), 2).unwrap();
        assert!(!cloud.is_empty());
        for p in &cloud {
            // Axis X: local z is world x.
            let rho = p[1].hypot(p[2]);
            let side = (rho - 1.0).abs() <= 1e-9 && (-1e-9..=2.0 + 1e-9).contains(&p[0]);
            let cap = (p[0].abs() <= 1e-9 || (p[0] - 2.0).abs() <= 1e-9) && rho <= 1.0 + 1e-9;
            assert!(side || cap, "{p:?}");
        }
    }

    #[test]
    fn arch_and_helix_residuals() {
        let specs = [
            ShapeSpec::new(
                ShapeKind::Arch {
                    inner_radius: 1.0,
                    outer_radius: 1.5,
                    depth: 0.5,
                },
                [1.0, 2.0, 3.0],
                200.0,
            )
            .with_axis(Axis::Y),
            ShapeSpec::new(
                ShapeKind::Helix {
                    radius: 1.0,
                    pitch: 0.8,
                    turns: 2.0,
                    tube_radius: 0.2,
                },
                [0.0; 3],
                200.0,
            ),
        ];
        let cloud = gen_shape_cloud(&specs, 3).unwrap();
        let arch_n = (specs[0].area() * 200.0).round() as usize;
        for (i, p) in cloud.iter().enumerate() {
            let spec = if i < arch_n { &specs[0] } else { &specs[1] };
            assert!(spec.residual(p) <= 1e-9, "point {i}: {}", spec.residual(p));
        }
    }

    #[test]
    fn empty_and_invalid_specs() {
        assert!(gen_shape_cloud(&[], 0).unwrap().is_empty());
        let bad = ShapeSpec::new(ShapeKind::Cylinder { radius: -1.0, height: 1.0 }, [0.0; 3], 1.0);
        let good = ShapeSpec::new(ShapeKind::Cuboid { size: [1.0; 3] }, [0.0; 3], 1.0);
        assert!(matches!(
            gen_shape_cloud(&[good, bad], 0),
            Err(Error::InvalidShape { index: 1, .. })
        ));
    }

    #[test]
    fn scene_fits_domain() {
        let cloud = gen_shape_cloud(&shape_scene(20_000, 0.1), 4).unwrap();
        let domain = shape_scene_domain();
        assert!(cloud.iter().all(|p| domain.contains(p)));
        assert!((cloud.len() as f64 - 20_000.0).abs() < 10.0);
    }

    #[test]
    fn start_goal_far_apart() {
        let map = UniformGridMap::new(Point::xy(0.0, 0.0), &[1.0, 1.0], &[20, 15]).unwrap();
        let (s, g) = place_start_goal(&map, 11, 20.0, 50).unwrap();
        let d = map.cell_center(&s).distance(&map.cell_center(&g));
        assert!(d >= 20.0);
        assert_eq!(place_start_goal(&map, 11, 20.0, 50), Some((s, g)));
        assert!(place_start_goal(&map, 11, 100.0, 50).is_none());
    }
}
