//! 2-D grid planning with 8-connected motion.
//!
//! Diagonal steps are legal only when both flanking cardinal cells are free
//! (no corner cutting). Straight steps cost 1 and diagonal steps cost √2. The
//! jump point search uses the pruning and forced-neighbor rules that match this
//! motion model; [`dijkstra_plan`] is the exhaustive reference.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point};
use crate::grid::{rasterize_adaptive, GridIndex, UniformGridMap};
use crate::tree::{morton_key, OctoTree};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Start and goal cells of a planning query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanRequest {
    pub start: GridIndex,
    pub goal: GridIndex,
}

impl PlanRequest {
    pub fn new(start: GridIndex, goal: GridIndex) -> Self {
        Self { start, goal }
    }
}

/// Cell-by-cell path with its step cost.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    pub nodes: Vec<GridIndex>,
    pub cost: f64,
}

impl GridPath {
    fn from_cells(cells: Vec<(usize, usize)>) -> Self {
        let mut straight = 0usize;
        let mut diagonal = 0usize;
        for w in cells.windows(2) {
            if w[0].0 != w[1].0 && w[0].1 != w[1].1 {
                diagonal += 1;
            } else {
                straight += 1;
            }
        }
        Self {
            nodes: cells.into_iter().map(|(x, y)| GridIndex::xy(x, y)).collect(),
            cost: straight as f64 + diagonal as f64 * SQRT2,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Length in meters: each step measured with the map's per-axis cell size.
    pub fn metric_length(&self, map: &UniformGridMap) -> f64 {
        let cs = map.cell_size();
        self.nodes
            .windows(2)
            .map(|w| {
                let dx = (w[1][0] as f64 - w[0][0] as f64) * cs[0];
                let dy = (w[1][1] as f64 - w[0][1] as f64) * cs[1];
                dx.hypot(dy)
            })
            .sum()
    }
}

/// Read-only view of a 2-D occupancy grid; cells outside the grid count as blocked.
struct Grid<'a> {
    w: isize,
    h: isize,
    occ: &'a [bool],
}

impl<'a> Grid<'a> {
    fn new(map: &'a UniformGridMap) -> Result<Self> {
        if map.dim() != 2 {
            return Err(Error::NotPlanar(map.dim()));
        }
        Ok(Self {
            w: map.dims()[0] as isize,
            h: map.dims()[1] as isize,
            occ: map.occupancy(),
        })
    }

    #[inline]
    fn free(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && x < self.w && y < self.h && !self.occ[(y * self.w + x) as usize]
    }

    #[inline]
    fn id(&self, x: isize, y: isize) -> usize {
        (y * self.w + x) as usize
    }

    #[inline]
    fn xy(&self, id: usize) -> (isize, isize) {
        let id = id as isize;
        (id % self.w, id / self.w)
    }

    /// Whether the single step `(x, y) -> (x + dx, y + dy)` is legal.
    #[inline]
    fn can_step(&self, x: isize, y: isize, dx: isize, dy: isize) -> bool {
        if !self.free(x + dx, y + dy) {
            return false;
        }
        dx == 0 || dy == 0 || (self.free(x + dx, y) && self.free(x, y + dy))
    }

    fn check(&self, req: &PlanRequest) -> Result<((isize, isize), (isize, isize))> {
        let inside = |g: &GridIndex| {
            g.dim() == 2 && (g[0] as isize) < self.w && (g[1] as isize) < self.h
        };
        if !inside(&req.start) {
            return Err(Error::StartOutOfBounds);
        }
        if !inside(&req.goal) {
            return Err(Error::GoalOutOfBounds);
        }
        let s = (req.start[0] as isize, req.start[1] as isize);
        let g = (req.goal[0] as isize, req.goal[1] as isize);
        if !self.free(s.0, s.1) {
            return Err(Error::StartOccupied { round: 0 });
        }
        if !self.free(g.0, g.1) {
            return Err(Error::GoalOccupied { round: 0 });
        }
        Ok((s, g))
    }
}

fn octile(a: (isize, isize), b: (isize, isize)) -> f64 {
    let dx = (a.0 - b.0).unsigned_abs() as f64;
    let dy = (a.1 - b.1).unsigned_abs() as f64;
    dx.max(dy) + (SQRT2 - 1.0) * dx.min(dy)
}

/// Open-list entry: lower f first, then larger g, then lower Morton index.
#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    key: u128,
    id: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap, so "better" must compare greater.
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.key.cmp(&self.key))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn morton(x: isize, y: isize) -> u128 {
    morton_key([x as u32, y as u32, 0], 2, 32)
}

/// Walks parent links from `goal` and expands every segment into unit steps.
fn unwind(grid: &Grid, parent: &[usize], start: usize, goal: usize) -> Vec<(usize, usize)> {
    let mut jumps = vec![goal];
    let mut cur = goal;
    while cur != start {
        cur = parent[cur];
        jumps.push(cur);
    }
    jumps.reverse();
    let mut cells = Vec::new();
    let (mut x, mut y) = grid.xy(jumps[0]);
    cells.push((x as usize, y as usize));
    for &j in &jumps[1..] {
        let (tx, ty) = grid.xy(j);
        let (dx, dy) = ((tx - x).signum(), (ty - y).signum());
        while (x, y) != (tx, ty) {
            x += dx;
            y += dy;
            cells.push((x as usize, y as usize));
        }
    }
    cells
}

/// Successor directions of a node reached from its parent along `(dx, dy)`.
fn pruned_dirs(grid: &Grid, x: isize, y: isize, dx: isize, dy: isize, out: &mut Vec<(isize, isize)>) {
    out.clear();
    if dx != 0 && dy != 0 {
        let vert = grid.free(x, y + dy);
        let horiz = grid.free(x + dx, y);
        if vert {
            out.push((0, dy));
        }
        if horiz {
            out.push((dx, 0));
        }
        if vert && horiz && grid.free(x + dx, y + dy) {
            out.push((dx, dy));
        }
    } else if dx != 0 {
        let next = grid.free(x + dx, y);
        let up = grid.free(x, y + 1);
        let down = grid.free(x, y - 1);
        if next {
            out.push((dx, 0));
            if up && grid.free(x + dx, y + 1) {
                out.push((dx, 1));
            }
            if down && grid.free(x + dx, y - 1) {
                out.push((dx, -1));
            }
        }
        if up {
            out.push((0, 1));
        }
        if down {
            out.push((0, -1));
        }
    } else {
        let next = grid.free(x, y + dy);
        let right = grid.free(x + 1, y);
        let left = grid.free(x - 1, y);
        if next {
            out.push((0, dy));
            if right && grid.free(x + 1, y + dy) {
                out.push((1, dy));
            }
            if left && grid.free(x - 1, y + dy) {
                out.push((-1, dy));
            }
        }
        if right {
            out.push((1, 0));
        }
        if left {
            out.push((-1, 0));
        }
    }
}

/// Straight jump from `(x, y)` along a cardinal direction.
fn jump_straight(grid: &Grid, mut x: isize, mut y: isize, dx: isize, dy: isize, goal: (isize, isize)) -> Option<(isize, isize)> {
    loop {
        x += dx;
        y += dy;
        if !grid.free(x, y) {
            return None;
        }
        if (x, y) == goal {
            return Some((x, y));
        }
        let forced = if dx != 0 {
            (grid.free(x, y + 1) && !grid.free(x - dx, y + 1))
                || (grid.free(x, y - 1) && !grid.free(x - dx, y - 1))
        } else {
            (grid.free(x + 1, y) && !grid.free(x + 1, y - dy))
                || (grid.free(x - 1, y) && !grid.free(x - 1, y - dy))
        };
        if forced {
            return Some((x, y));
        }
    }
}

/// Jump along `(dx, dy)` starting with one step from `(x, y)`.
fn jump(grid: &Grid, x: isize, y: isize, dx: isize, dy: isize, goal: (isize, isize)) -> Option<(isize, isize)> {
    if dx == 0 || dy == 0 {
        return jump_straight(grid, x, y, dx, dy, goal);
    }
    let (mut x, mut y) = (x, y);
    loop {
        if !grid.can_step(x, y, dx, dy) {
            return None;
        }
        x += dx;
        y += dy;
        if (x, y) == goal {
            return Some((x, y));
        }
        if jump_straight(grid, x, y, dx, 0, goal).is_some()
            || jump_straight(grid, x, y, 0, dy, goal).is_some()
        {
            return Some((x, y));
        }
    }
}

const ALL_DIRS: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Cost-optimal path by jump point search, or `None` when the goal is unreachable.
pub fn jps_plan(map: &UniformGridMap, req: &PlanRequest) -> Result<Option<GridPath>> {
    let grid = Grid::new(map)?;
    let (s, g) = grid.check(req)?;
    if s == g {
        return Ok(Some(GridPath::from_cells(vec![(s.0 as usize, s.1 as usize)])));
    }
    let n = grid.occ.len();
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let sid = grid.id(s.0, s.1);
    let gid = grid.id(g.0, g.1);
    best[sid] = 0.0;
    heap.push(Open {
        f: octile(s, g),
        g: 0.0,
        key: morton(s.0, s.1),
        id: sid,
    });
    let mut dirs = Vec::with_capacity(8);
    while let Some(Open { g: cost, id, .. }) = heap.pop() {
        if closed[id] {
            continue;
        }
        closed[id] = true;
        if id == gid {
            return Ok(Some(GridPath::from_cells(unwind(&grid, &parent, sid, gid))));
        }
        let (x, y) = grid.xy(id);
        if id == sid {
            dirs.clear();
            dirs.extend_from_slice(&ALL_DIRS);
        } else {
            let (px, py) = grid.xy(parent[id]);
            pruned_dirs(&grid, x, y, (x - px).signum(), (y - py).signum(), &mut dirs);
        }
        for &(dx, dy) in &dirs {
            let Some(jp) = jump(&grid, x, y, dx, dy, g) else {
                continue;
            };
            let jid = grid.id(jp.0, jp.1);
            if closed[jid] {
                continue;
            }
            let ng = cost + octile((x, y), jp);
            if ng < best[jid] {
                best[jid] = ng;
                parent[jid] = id;
                heap.push(Open {
                    f: ng + octile(jp, g),
                    g: ng,
                    key: morton(jp.0, jp.1),
                    id: jid,
                });
            }
        }
    }
    Ok(None)
}

/// Exhaustive uniform-cost search over the same motion model.
pub fn dijkstra_plan(map: &UniformGridMap, req: &PlanRequest) -> Result<Option<GridPath>> {
    let grid = Grid::new(map)?;
    let (s, g) = grid.check(req)?;
    let n = grid.occ.len();
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let sid = grid.id(s.0, s.1);
    let gid = grid.id(g.0, g.1);
    best[sid] = 0.0;
    heap.push(Open {
        f: 0.0,
        g: 0.0,
        key: morton(s.0, s.1),
        id: sid,
    });
    while let Some(Open { g: cost, id, .. }) = heap.pop() {
        if closed[id] {
            continue;
        }
        closed[id] = true;
        if id == gid {
            return Ok(Some(GridPath::from_cells(unwind(&grid, &parent, sid, gid))));
        }
        let (x, y) = grid.xy(id);
        for &(dx, dy) in &ALL_DIRS {
            if !grid.can_step(x, y, dx, dy) {
                continue;
            }
            let nid = grid.id(x + dx, y + dy);
            let step = if dx != 0 && dy != 0 { SQRT2 } else { 1.0 };
            let ng = cost + step;
            if !closed[nid] && ng < best[nid] {
                best[nid] = ng;
                parent[nid] = id;
                heap.push(Open {
                    f: ng,
                    g: ng,
                    key: morton(x + dx, y + dy),
                    id: nid,
                });
            }
        }
    }
    Ok(None)
}

/// Result of [`plan_with_refinement`].
#[derive(Clone, Debug)]
pub struct RefinedPlan {
    pub path: GridPath,
    /// The map the path was found on.
    pub map: UniformGridMap,
    /// Number of dynamic partitions performed before success.
    pub round: usize,
}

/// Rasterizes `tree`, plans with JPS and deepens the tree after each failure,
/// for at most `max_rounds` extra rounds.
///
/// When `window` is given the adaptive grid is cropped to it before planning.
/// Occupied start or goal cells at one depth do not stop the loop, since a
/// finer grid may free them; the occupied error is returned only when it
/// occurred at every attempted depth.
pub fn plan_with_refinement(
    tree: &mut OctoTree,
    start: &Point,
    goal: &Point,
    max_rounds: usize,
    window: Option<&Aabb>,
) -> Result<RefinedPlan> {
    if tree.dim() != 2 {
        return Err(Error::NotPlanar(tree.dim()));
    }
    let mut occupied = None;
    let mut searched = false;
    for round in 0..=max_rounds {
        if round > 0 {
            match tree.dynamic_partition() {
                Ok(()) => {}
                Err(Error::DepthCapExceeded { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        let full = rasterize_adaptive(tree);
        let map = match window {
            Some(w) => full.window(w)?,
            None => full,
        };
        let s = map.cell_of(start).ok_or(Error::StartOutOfBounds)?;
        let g = map.cell_of(goal).ok_or(Error::GoalOutOfBounds)?;
        match jps_plan(&map, &PlanRequest::new(s, g)) {
            Ok(Some(path)) => return Ok(RefinedPlan { path, map, round }),
            Ok(None) => searched = true,
            Err(Error::StartOccupied { .. }) => occupied = Some(Error::StartOccupied { round }),
            Err(Error::GoalOccupied { .. }) => occupied = Some(Error::GoalOccupied { round }),
            Err(e) => return Err(e),
        }
    }
    match occupied {
        Some(e) if !searched => Err(e),
        _ => Err(Error::NoPathAtMaxDepth { rounds: max_rounds }),
    }
}
