//! File formats.
//!
//! | Artifact | Format |
//! |---|---|
//! | Cloud | XYZ text (`x y z` per line) or binary: `u64` LE count, then LE `f64` triples |
//! | Grid | PGM P2 (0 free, 255 occupied, 128 path) or JSON with run-length occupancy |
//! | Path | JSON `{cells, cost, cell_size, metric_length}` |
//! | Mesh | Wavefront OBJ, one group per leaf |
//!
//! Planar clouds are written with `z = 0`. Floats are printed in their
//! shortest round-trip form, so text round trips are bit-exact.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexHull, Point, PointCloud};
use crate::grid::{GridIndex, UniformGridMap};
use crate::planner::GridPath;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn write_xyz<W: Write>(cloud: &PointCloud, mut w: W) -> Result<()> {
    for p in cloud {
        let [x, y, z] = p.xyz_padded();
        writeln!(w, "{x} {y} {z}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an XYZ text cloud. Blank lines and lines starting with `#` are
/// skipped. For `dim == 2` the third column must be zero or absent.
pub fn read_xyz<R: BufRead>(r: R, dim: usize) -> Result<PointCloud> {
    let mut cloud = PointCloud::new(dim)?;
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let vals = text
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| parse_err(line_no, format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let coords = match (dim, vals.len()) {
            (2, 2) | (3, 3) => &vals[..],
            (2, 3) if vals[2] == 0.0 => &vals[..2],
            (2, 3) => return Err(parse_err(line_no, "non-zero z in a planar cloud")),
            (_, n) => return Err(parse_err(line_no, format!("expected {dim} coordinates, got {n}"))),
        };
        let p = Point::new(coords).map_err(|e| parse_err(line_no, e.to_string()))?;
        cloud.push(p)?;
    }
    Ok(cloud)
}

pub fn write_binary<W: Write>(cloud: &PointCloud, mut w: W) -> Result<()> {
    w.write_all(&(cloud.len() as u64).to_le_bytes())?;
    for p in cloud {
        for c in p.xyz_padded() {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a binary cloud; for `dim == 2` every z must be zero.
pub fn read_binary<R: Read>(mut r: R, dim: usize) -> Result<PointCloud> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let n = u64::from_le_bytes(buf) as usize;
    let mut cloud = PointCloud::new(dim)?;
    for i in 0..n {
        let mut xyz = [0.0; 3];
        for c in &mut xyz {
            r.read_exact(&mut buf)?;
            *c = f64::from_le_bytes(buf);
        }
        if dim == 2 && xyz[2] != 0.0 {
            return Err(parse_err(i + 1, "non-zero z in a planar cloud"));
        }
        let p = Point::new(&xyz[..dim]).map_err(|e| parse_err(i + 1, e.to_string()))?;
        cloud.push(p)?;
    }
    Ok(cloud)
}

/// Plain PGM of a 2-D grid, top row = highest y. Path cells are drawn at 128.
pub fn write_pgm<W: Write>(map: &UniformGridMap, path: Option<&GridPath>, mut w: W) -> Result<()> {
    if map.dim() != 2 {
        return Err(Error::NotPlanar(map.dim()));
    }
    let (nx, ny) = (map.dims()[0], map.dims()[1]);
    let mut pixels: Vec<u8> = map.occupancy().iter().map(|&o| if o { 255 } else { 0 }).collect();
    if let Some(path) = path {
        for c in &path.nodes {
            if let Some(l) = map.linear(c) {
                pixels[l] = 128;
            }
        }
    }
    writeln!(w, "P2\n{nx} {ny}\n255")?;
    for y in (0..ny).rev() {
        let row: Vec<String> = pixels[y * nx..(y + 1) * nx].iter().map(u8::to_string).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

/// JSON descriptor of a grid. `occupancy` holds alternating run lengths in
/// storage order (axis 0 fastest), starting with a run of free cells that may
/// be empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDocument {
    pub dims: Vec<usize>,
    pub cell_size: Vec<f64>,
    pub origin: Vec<f64>,
    pub occupancy: Vec<usize>,
}

impl GridDocument {
    pub fn from_map(map: &UniformGridMap) -> Self {
        let mut runs = Vec::new();
        let mut current = false;
        let mut run = 0;
        for &o in map.occupancy() {
            if o != current {
                runs.push(run);
                run = 0;
                current = o;
            }
            run += 1;
        }
        runs.push(run);
        Self {
            dims: map.dims().to_vec(),
            cell_size: map.cell_size().to_vec(),
            origin: map.origin().coords().to_vec(),
            occupancy: runs,
        }
    }

    pub fn to_map(&self) -> Result<UniformGridMap> {
        let origin = Point::new(&self.origin)?;
        let mut map = UniformGridMap::new(origin, &self.cell_size, &self.dims)?;
        let mut lin = 0;
        let mut value = false;
        for &run in &self.occupancy {
            if lin + run > map.len() {
                return Err(Error::InvalidSpec("occupancy runs exceed grid size".into()));
            }
            if value {
                for l in lin..lin + run {
                    map.set(&map.index_of(l), true);
                }
            }
            lin += run;
            value = !value;
        }
        if lin != map.len() {
            return Err(Error::InvalidSpec("occupancy runs do not cover the grid".into()));
        }
        Ok(map)
    }
}

pub fn write_grid_json<W: Write>(map: &UniformGridMap, mut w: W) -> Result<()> {
    serde_json::to_writer(&mut w, &GridDocument::from_map(map))
        .map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

pub fn read_grid_json<R: Read>(r: R) -> Result<UniformGridMap> {
    let doc: GridDocument = serde_json::from_reader(r).map_err(|e| parse_err(e.line(), e.to_string()))?;
    doc.to_map()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathDocument {
    pub cells: Vec<Vec<usize>>,
    pub cost: f64,
    pub cell_size: Vec<f64>,
    pub metric_length: f64,
}

impl PathDocument {
    pub fn new(path: &GridPath, map: &UniformGridMap) -> Self {
        Self {
            cells: path.nodes.iter().map(|c| c.as_slice().to_vec()).collect(),
            cost: path.cost,
            cell_size: map.cell_size().to_vec(),
            metric_length: path.metric_length(map),
        }
    }

    pub fn cells(&self) -> Result<Vec<GridIndex>> {
        self.cells.iter().map(|c| GridIndex::new(c)).collect()
    }
}

pub fn write_path_json<W: Write>(path: &GridPath, map: &UniformGridMap, mut w: W) -> Result<()> {
    serde_json::to_writer(&mut w, &PathDocument::new(path, map))
        .map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// OBJ with one `g leaf_<k>` group per mesh. Face indices are 1-based and
/// global; 2-D hulls are fan-triangulated at `z = 0`.
pub fn write_obj<W: Write>(meshes: &[ConvexHull], mut w: W) -> Result<()> {
    writeln!(w, "# {} meshes", meshes.len())?;
    let mut base = 1;
    for (k, hull) in meshes.iter().enumerate() {
        writeln!(w, "g leaf_{k}")?;
        for v in hull.vertices() {
            let [x, y, z] = v.xyz_padded();
            writeln!(w, "v {x} {y} {z}")?;
        }
        for [a, b, c] in hull.triangles() {
            writeln!(w, "f {} {} {}", a + base, b + base, c + base)?;
        }
        base += hull.vertices().len();
    }
    w.flush()?;
    Ok(())
}

/// Element counts of an OBJ document.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ObjSummary {
    pub groups: usize,
    pub vertices: usize,
    pub faces: usize,
}

/// Parses the subset of OBJ written by [`write_obj`], checking face indices.
pub fn parse_obj<R: BufRead>(r: R) -> Result<ObjSummary> {
    let mut s = ObjSummary::default();
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            None | Some("#") => {}
            Some("g") => s.groups += 1,
            Some("v") => {
                let n = tok
                    .map(|t| t.parse::<f64>().map_err(|e| parse_err(line_no, e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                if n.len() != 3 {
                    return Err(parse_err(line_no, "vertex needs 3 coordinates"));
                }
                s.vertices += 1;
            }
            Some("f") => {
                let idx = tok
                    .map(|t| t.parse::<usize>().map_err(|e| parse_err(line_no, e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                if idx.len() != 3 || idx.iter().any(|&k| k == 0 || k > s.vertices) {
                    return Err(parse_err(line_no, "face needs 3 valid vertex indices"));
                }
                s.faces += 1;
            }
            Some(t) if t.starts_with('#') => {}
            Some(t) => return Err(parse_err(line_no, format!("unsupported element {t:?}"))),
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quickhull_points;
    use crate::planner::{jps_plan, PlanRequest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(dim: usize, n: usize) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = (0..n)
            .map(|_| {
                let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-50.0..50.0)).collect();
                Point::new(&c).unwrap()
            })
            .collect();
        PointCloud::from_points(dim, pts).unwrap()
    }

    #[test]
    fn xyz_round_trip_is_exact() {
        for dim in [2, 3] {
            let cloud = random_cloud(dim, 500);
            let mut buf = Vec::new();
            write_xyz(&cloud, &mut buf).unwrap();
            assert_eq!(read_xyz(&buf[..], dim).unwrap(), cloud);
        }
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let cloud = random_cloud(3, 500);
        let mut buf = Vec::new();
        write_binary(&cloud, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 500 * 24);
        assert_eq!(read_binary(&buf[..], 3).unwrap(), cloud);
    }

    #[test]
    fn xyz_errors_name_line() {
        let text = "1 2 3\n\n4 five 6\n";
        assert!(matches!(
            read_xyz(text.as_bytes(), 3),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            read_xyz("1 2 3\n".as_bytes(), 2),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(read_xyz("".as_bytes(), 3).unwrap().is_empty());
    }

    #[test]
    fn grid_json_round_trip() {
        let mut map = UniformGridMap::new(Point::xy(1.0, -2.0), &[0.5, 0.25], &[7, 5]).unwrap();
        for l in [0, 1, 2, 10, 34] {
            map.set(&map.index_of(l), true);
        }
        let mut buf = Vec::new();
        write_grid_json(&map, &mut buf).unwrap();
        let doc: GridDocument = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc.occupancy, vec![0, 3, 7, 1, 23, 1]);
        assert_eq!(read_grid_json(&buf[..]).unwrap(), map);
    }

    #[test]
    fn pgm_layout() {
        let mut map = UniformGridMap::new(Point::xy(0.0, 0.0), &[1.0, 1.0], &[3, 2]).unwrap();
        map.set(&GridIndex::xy(2, 1), true);
        let path = jps_plan(&map, &PlanRequest::new(GridIndex::xy(0, 0), GridIndex::xy(2, 0)))
            .unwrap()
            .unwrap();
        let mut buf = Vec::new();
        write_pgm(&map, Some(&path), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "P2\n3 2\n255\n0 0 255\n128 128 128\n");
    }

    #[test]
    fn obj_round_trip_counts() {
        let mut corners = Vec::new();
        for i in 0..8 {
            corners.push(Point::xyz((i & 1) as f64, ((i >> 1) & 1) as f64, (i >> 2) as f64));
        }
        let cube = quickhull_points(&corners).unwrap();
        let mut buf = Vec::new();
        write_obj(std::slice::from_ref(&cube), &mut buf).unwrap();
        let s = parse_obj(&buf[..]).unwrap();
        assert_eq!(s, ObjSummary { groups: 1, vertices: 8, faces: 12 });

        let mut empty = Vec::new();
        write_obj(&[], &mut empty).unwrap();
        assert_eq!(parse_obj(&empty[..]).unwrap(), ObjSummary::default());
    }
}
