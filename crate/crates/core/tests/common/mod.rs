//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use octogrid::{GridIndex, GridPath, Point, UniformGridMap};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Every triangle `(i, j, k)` with all other points on its non-positive side,
/// oriented outward. Assumes general position.
pub fn brute_force_faces(pts: &[Point]) -> Vec<[usize; 3]> {
    let v: Vec<[f64; 3]> = pts.iter().map(|p| p.xyz_padded()).collect();
    let n = v.len();
    let mut faces = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let normal = cross(sub(v[j], v[i]), sub(v[k], v[i]));
                let (mut pos, mut neg) = (false, false);
                for (m, q) in v.iter().enumerate() {
                    if m == i || m == j || m == k {
                        continue;
                    }
                    let s = dot(normal, sub(*q, v[i]));
                    if s > 1e-12 {
                        pos = true;
                    } else if s < -1e-12 {
                        neg = true;
                    }
                    if pos && neg {
                        break;
                    }
                }
                if !pos {
                    faces.push([i, j, k]);
                } else if !neg {
                    faces.push([i, k, j]);
                }
            }
        }
    }
    faces
}

/// Whether `p` is on the inner side of every outward face (within `eps`).
pub fn inside_faces(pts: &[Point], faces: &[[usize; 3]], p: &Point, eps: f64) -> bool {
    let q = p.xyz_padded();
    faces.iter().all(|&[a, b, c]| {
        let (a, b, c) = (pts[a].xyz_padded(), pts[b].xyz_padded(), pts[c].xyz_padded());
        let n = cross(sub(b, a), sub(c, a));
        let len = dot(n, n).sqrt();
        dot(n, sub(q, a)) / len <= eps
    })
}

/// Volume enclosed by outward faces.
pub fn faces_volume(pts: &[Point], faces: &[[usize; 3]]) -> f64 {
    faces
        .iter()
        .map(|&[a, b, c]| {
            let (a, b, c) = (pts[a].xyz_padded(), pts[b].xyz_padded(), pts[c].xyz_padded());
            dot(a, cross(b, c)) / 6.0
        })
        .sum()
}

/// Checks the path invariants independently of the planner: 8-neighbor
/// steps, free cells, no corner cutting and the step-cost sum.
pub fn validate_path(map: &UniformGridMap, path: &GridPath, start: GridIndex, goal: GridIndex) -> Result<(), String> {
    let nodes = &path.nodes;
    if nodes.first() != Some(&start) || nodes.last() != Some(&goal) {
        return Err("path does not connect start and goal".into());
    }
    let free = |x: i64, y: i64| {
        x >= 0
            && y >= 0
            && (x as usize) < map.dims()[0]
            && (y as usize) < map.dims()[1]
            && map.get(&GridIndex::xy(x as usize, y as usize)) == Some(false)
    };
    let mut cost = 0.0;
    for (k, w) in nodes.windows(2).enumerate() {
        let (x0, y0) = (w[0][0] as i64, w[0][1] as i64);
        let (x1, y1) = (w[1][0] as i64, w[1][1] as i64);
        let (dx, dy) = (x1 - x0, y1 - y0);
        if dx.abs() > 1 || dy.abs() > 1 || (dx == 0 && dy == 0) {
            return Err(format!("step {k} is not an 8-neighbor move"));
        }
        if !free(x1, y1) {
            return Err(format!("step {k} enters an occupied cell"));
        }
        if dx != 0 && dy != 0 {
            if !free(x0 + dx, y0) || !free(x0, y0 + dy) {
                return Err(format!("step {k} cuts a corner"));
            }
            cost += SQRT2;
        } else {
            cost += 1.0;
        }
    }
    if !free(nodes[0][0] as i64, nodes[0][1] as i64) {
        return Err("start cell is occupied".into());
    }
    if (cost - path.cost).abs() > 1e-9 {
        return Err(format!("cost {} does not match step sum {cost}", path.cost));
    }
    Ok(())
}
