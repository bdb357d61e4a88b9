//! Adaptive 2^d-ary tree over a point cloud.
//!
//! Every level bisects all axes of a node's split boundary at the midpoint, so
//! a tree of depth `n` partitions the domain into `2^n` cells per axis. Children
//! are created lazily on the first point routed through them, and the list of
//! occupied leaves is maintained incrementally.
//!
//! Orthant membership is half-open (a point belongs to the upper child on an
//! axis iff it is at or beyond the midpoint); the domain's upper faces are
//! closed. The comparison is carried out on the integer cell lattice of the
//! current depth, which keeps insertion at depth `n + 1` exactly consistent with
//! refining a depth-`n` leaf.

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point, PointCloud};

/// Hard limit on tree depth unless configured otherwise.
pub const DEFAULT_DEPTH_CAP: u32 = 16;

/// Minimum controllable region: an infinity-norm ball of radius `epsilon_max`,
/// together with the safety factor `k` used when deriving the tree depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McrSpec {
    pub epsilon_max: f64,
    pub k: f64,
}

impl McrSpec {
    pub fn new(epsilon_max: f64, k: f64) -> Result<Self> {
        let spec = Self { epsilon_max, k };
        spec.validate()?;
        Ok(spec)
    }

    /// The MCR whose scaled edge `k * p` equals `cell_size`.
    pub fn for_cell_size(cell_size: f64, k: f64) -> Result<Self> {
        Self::new(cell_size / (2.0 * k), k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_max.is_finite() && self.epsilon_max > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "epsilon_max must be positive, got {}",
                self.epsilon_max
            )));
        }
        if !(self.k.is_finite() && self.k > 1.0) {
            return Err(Error::InvalidSpec(format!(
                "safety factor k must exceed 1, got {}",
                self.k
            )));
        }
        Ok(())
    }

    /// MCR edge length `p = 2 * epsilon_max`.
    pub fn edge(&self) -> f64 {
        2.0 * self.epsilon_max
    }
}

/// Depth `max(0, ceil(log2(L / (k * p))))`, clamped to [`DEFAULT_DEPTH_CAP`].
pub fn compute_depth(domain_edge: f64, mcr: &McrSpec) -> Result<u32> {
    compute_depth_capped(domain_edge, mcr, DEFAULT_DEPTH_CAP)
}

pub fn compute_depth_capped(domain_edge: f64, mcr: &McrSpec, cap: u32) -> Result<u32> {
    mcr.validate()?;
    if !(domain_edge.is_finite() && domain_edge > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "domain edge must be positive, got {domain_edge}"
        )));
    }
    let ratio = domain_edge / (mcr.k * mcr.edge());
    if ratio <= 1.0 {
        return Ok(0);
    }
    // Smallest n with 2^n >= ratio; the correction loops absorb log2 rounding.
    let mut n = ratio.log2().ceil().max(0.0) as i32;
    while n > 0 && 2f64.powi(n - 1) >= ratio {
        n -= 1;
    }
    while 2f64.powi(n) < ratio {
        n += 1;
    }
    Ok((n as u32).min(cap))
}

/// Index of a node in its tree's arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    parent: Option<NodeId>,
    children: [Option<NodeId>; 8],
    points: Vec<Point>,
    split_boundary: Aabb,
    node_boundary: Option<Aabb>,
    level: u32,
    cell: [u32; 3],
}

impl TreeNode {
    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    /// The `2^d` child slots; only visited orthants are populated.
    pub fn children(&self) -> &[Option<NodeId>] {
        &self.children[..1 << self.split_boundary.dim()]
    }

    /// Points stored at this node (non-empty only for occupied leaves).
    pub fn point_cloud(&self) -> &[Point] {
        &self.points
    }

    pub fn split_boundary(&self) -> &Aabb {
        &self.split_boundary
    }

    /// Tight bounds of all points inserted below this node.
    pub fn node_boundary(&self) -> Option<&Aabb> {
        self.node_boundary.as_ref()
    }

    /// Distance from the root (root = 0).
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Integer cell coordinates of this node's split boundary at its level.
    pub fn cell(&self) -> [u32; 3] {
        self.cell
    }

    pub fn is_leaf(&self) -> bool {
        self.children.iter().all(Option::is_none)
    }
}

/// Read-out record of one occupied leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafRecord {
    pub id: NodeId,
    /// Cell coordinates at the tree depth (the grid index of the leaf).
    pub cell: [u32; 3],
    pub split_boundary: Aabb,
    pub node_boundary: Aabb,
    pub point_count: usize,
}

/// Adaptive tree over a fixed domain.
#[derive(Clone, Debug)]
pub struct OctoTree {
    nodes: Vec<TreeNode>,
    depth: u32,
    depth_cap: u32,
    domain: Aabb,
    leaves: Vec<NodeId>,
    len: usize,
}

impl OctoTree {
    /// Empty tree with a root covering `domain`.
    pub fn new(domain: Aabb, depth: u32) -> Result<Self> {
        Self::with_depth_cap(domain, depth, DEFAULT_DEPTH_CAP)
    }

    pub fn with_depth_cap(domain: Aabb, depth: u32, depth_cap: u32) -> Result<Self> {
        if depth > depth_cap {
            return Err(Error::DepthCapExceeded { cap: depth_cap });
        }
        let root = TreeNode {
            parent: None,
            children: [None; 8],
            points: Vec::new(),
            split_boundary: domain,
            node_boundary: None,
            level: 0,
            cell: [0; 3],
        };
        Ok(Self {
            nodes: vec![root],
            depth,
            depth_cap,
            domain,
            leaves: Vec::new(),
            len: 0,
        })
    }

    /// Inserts every point of `cloud` in order.
    pub fn build(cloud: &PointCloud, domain: Aabb, depth: u32) -> Result<Self> {
        if cloud.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: cloud.dim(),
            });
        }
        let mut tree = Self::new(domain, depth)?;
        for p in cloud {
            tree.push_point(*p)?;
        }
        Ok(tree)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn depth_cap(&self) -> u32 {
        self.depth_cap
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Aabb {
        &self.domain
    }

    /// Number of inserted points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id.index()]
    }

    /// All materialized nodes, root first.
    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter()
    }

    /// Occupied leaves in first-occupancy order.
    pub fn leaf_ids(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn depth_remaining(&self, id: NodeId) -> u32 {
        self.depth - self.node(id).level
    }

    /// Leaf edge length along `axis` at the current depth.
    pub fn leaf_edge(&self, axis: usize) -> f64 {
        self.domain.edge(axis) / (1u64 << self.depth) as f64
    }

    /// Cell coordinates of `p` on the lattice of the given depth.
    pub fn lattice_index(&self, p: &Point, depth: u32) -> [u32; 3] {
        let n = 1u64 << depth;
        let mut idx = [0u32; 3];
        for (a, slot) in idx.iter_mut().enumerate().take(self.dim()) {
            let edge = self.domain.edge(a);
            if edge <= 0.0 {
                continue;
            }
            let cell = edge / n as f64;
            let x = ((p[a] - self.domain.min()[a]) / cell).floor();
            *slot = x.clamp(0.0, (n - 1) as f64) as u32;
        }
        idx
    }

    /// Box of `cell` at `level`; the top cell on each axis ends exactly at the domain max.
    pub fn cell_box(&self, level: u32, cell: [u32; 3]) -> Aabb {
        let n = 1u64 << level;
        let dim = self.dim();
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..dim {
            let min = self.domain.min()[a];
            let size = self.domain.edge(a) / n as f64;
            let k = cell[a] as u64;
            lo[a] = min + k as f64 * size;
            hi[a] = if k + 1 == n {
                self.domain.max()[a]
            } else {
                min + (k + 1) as f64 * size
            };
        }
        Aabb::new(Point::from_raw(lo, dim), Point::from_raw(hi, dim))
            .expect("cell bounds are ordered")
    }

    /// Routes `p` down to its depth-level leaf, creating nodes along the way.
    pub fn push_point(&mut self, p: Point) -> Result<NodeId> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        if !self.domain.contains(&p) {
            return Err(Error::PointOutOfDomain {
                index: self.len,
                coords: p.coords().to_vec(),
            });
        }
        let idx = self.lattice_index(&p, self.depth);
        let mut cur = self.root();
        self.grow_boundary(cur, &p);
        for level in 0..self.depth {
            let shift = self.depth - 1 - level;
            let mut child = [0u32; 3];
            let mut slot = 0usize;
            for a in 0..self.dim() {
                child[a] = idx[a] >> shift;
                slot |= ((child[a] & 1) as usize) << a;
            }
            cur = self.child_or_create(cur, slot, child);
            self.grow_boundary(cur, &p);
        }
        self.store(cur, p);
        self.len += 1;
        Ok(cur)
    }

    /// Deepens the tree by one level, pushing every point of every occupied
    /// leaf into the matching child. Time is linear in leaves plus points.
    pub fn dynamic_partition(&mut self) -> Result<()> {
        if self.depth + 1 > self.depth_cap {
            return Err(Error::DepthCapExceeded {
                cap: self.depth_cap,
            });
        }
        self.depth += 1;
        let old = std::mem::take(&mut self.leaves);
        for leaf in old {
            let points = std::mem::take(&mut self.nodes[leaf.index()].points);
            let parent_cell = self.nodes[leaf.index()].cell;
            for p in points {
                let idx = self.lattice_index(&p, self.depth);
                let mut slot = 0usize;
                for a in 0..self.dim() {
                    debug_assert_eq!(idx[a] >> 1, parent_cell[a]);
                    slot |= ((idx[a] & 1) as usize) << a;
                }
                let child = self.child_or_create(leaf, slot, idx);
                self.grow_boundary(child, &p);
                self.store(child, p);
            }
        }
        Ok(())
    }

    /// Occupied leaves in Morton order of their cell coordinates.
    pub fn occupied_leaves(&self) -> Vec<LeafRecord> {
        let mut records: Vec<(u128, LeafRecord)> = self
            .leaves
            .iter()
            .map(|&id| {
                let node = self.node(id);
                let record = LeafRecord {
                    id,
                    cell: node.cell,
                    split_boundary: node.split_boundary,
                    node_boundary: node.node_boundary.expect("occupied leaf has bounds"),
                    point_count: node.points.len(),
                };
                (morton_key(node.cell, self.dim(), self.depth), record)
            })
            .collect();
        records.sort_by_key(|(key, _)| *key);
        records.into_iter().map(|(_, r)| r).collect()
    }

    fn child_or_create(&mut self, parent: NodeId, slot: usize, cell: [u32; 3]) -> NodeId {
        if let Some(id) = self.nodes[parent.index()].children[slot] {
            return id;
        }
        let level = self.nodes[parent.index()].level + 1;
        let id = NodeId(self.nodes.len() as u32);
        let node = TreeNode {
            parent: Some(parent),
            children: [None; 8],
            points: Vec::new(),
            split_boundary: self.cell_box(level, cell),
            node_boundary: None,
            level,
            cell,
        };
        self.nodes.push(node);
        self.nodes[parent.index()].children[slot] = Some(id);
        id
    }

    fn grow_boundary(&mut self, id: NodeId, p: &Point) {
        let node = &mut self.nodes[id.index()];
        match node.node_boundary.as_mut() {
            Some(b) => b.expand(p),
            None => node.node_boundary = Some(Aabb::from_point(*p)),
        }
    }

    fn store(&mut self, leaf: NodeId, p: Point) {
        let node = &mut self.nodes[leaf.index()];
        if node.points.is_empty() {
            self.leaves.push(leaf);
        }
        node.points.push(p);
    }
}

/// Bit-interleaved key with axis 0 in the least significant position of each level.
pub fn morton_key(cell: [u32; 3], dim: usize, bits: u32) -> u128 {
    let mut key = 0u128;
    for b in 0..bits {
        for (a, &c) in cell.iter().enumerate().take(dim) {
            key |= (((c >> b) & 1) as u128) << (b as usize * dim + a);
        }
    }
    key
}
