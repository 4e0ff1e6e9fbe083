//! Hypercubic lattice graphs with a distinguished boundary.
//!
//! The interior of a `d`-dimensional lattice of side `n` is the integer box
//! `{1, ..., n}^d`.  Boundary nodes sit one step outside a face: exactly one
//! coordinate equals `0` or `n + 1` and the remaining coordinates stay in
//! `{1, ..., n}`.  Edges join nodes at taxicab distance one, except that two
//! boundary nodes are never adjacent, so every boundary node has exactly one
//! neighbor and that neighbor is interior.
//!
//! Nodes are indexed with interior nodes first, each class sorted
//! lexicographically by coordinates.  Edges are sorted lexicographically by
//! (smaller endpoint, larger endpoint).  All matrix layouts in this crate
//! derive from these two orderings.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Index of a node in the canonical node ordering (interior block first).
pub type NodeId = usize;

/// Index of an edge in the canonical edge ordering.
pub type EdgeId = usize;

/// Distinguishes the two node classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
}

/// Node sets attached to one diagonal level `t` (classification of nodes by
/// their coordinate sum), together with the cumulative sets for sums `<= t`.
///
/// Interior nodes of level `t` form a diagonal slice of the box; boundary
/// nodes of level `t` split into those sitting on a `0`-face ("low") and
/// those on an `(n + 1)`-face ("high").  The corner boundary of level `t`
/// collects the boundary nodes whose data drives the recovery of the corner
/// region up to that level: low nodes of level `t` plus high nodes of level
/// `t + 1`, and cumulatively low nodes with sum `<= t` plus high nodes with
/// sum `<= t + 1`.
///
/// All vectors are sorted by node id, which matches the canonical ordering
/// within each node class.
#[derive(Debug, Clone)]
pub struct SliceSets {
    /// The level `t` these sets describe.
    pub level: usize,
    /// Interior nodes with coordinate sum `t`.
    pub interior: Vec<NodeId>,
    /// Boundary nodes with coordinate sum `t`.
    pub boundary: Vec<NodeId>,
    /// Boundary nodes of level `t` with a zero coordinate.
    pub boundary_low: Vec<NodeId>,
    /// Boundary nodes of level `t` with an `n + 1` coordinate.
    pub boundary_high: Vec<NodeId>,
    /// Corner boundary at level `t`: low nodes of level `t` and high nodes
    /// of level `t + 1`.
    pub corner_boundary: Vec<NodeId>,
    /// Interior nodes with coordinate sum `<= t`.
    pub interior_cum: Vec<NodeId>,
    /// Low boundary nodes with coordinate sum `<= t`.
    pub boundary_low_cum: Vec<NodeId>,
    /// High boundary nodes with coordinate sum `<= t`.
    pub boundary_high_cum: Vec<NodeId>,
    /// Cumulative corner boundary: low nodes with sum `<= t` and high nodes
    /// with sum `<= t + 1`.
    pub corner_boundary_cum: Vec<NodeId>,
}

/// One of the `2^d` corners of the box, encoded as a reflection flag per
/// axis: `false` keeps the axis, `true` reflects `x -> n + 1 - x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Corner {
    flags: Vec<bool>,
}

impl Corner {
    /// The corner with all flags clear (the origin corner).
    pub fn origin(dim: usize) -> Self {
        Corner { flags: vec![false; dim] }
    }

    /// Builds a corner from explicit per-axis reflection flags.
    pub fn new(flags: Vec<bool>) -> Self {
        Corner { flags }
    }

    /// All `2^d` corners in lexicographic flag order (origin first).
    pub fn all(dim: usize) -> Vec<Corner> {
        let mut out = Vec::with_capacity(1 << dim);
        for mask in 0u32..(1 << dim) {
            let flags = (0..dim).map(|i| mask >> (dim - 1 - i) & 1 == 1).collect();
            out.push(Corner { flags });
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.flags.len()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_origin(&self) -> bool {
        self.flags.iter().all(|&f| !f)
    }

    /// Reflects a coordinate tuple through this corner.
    pub fn reflect(&self, size: usize, coords: &[i32]) -> Vec<i32> {
        coords
            .iter()
            .zip(&self.flags)
            .map(|(&x, &f)| if f { size as i32 + 1 - x } else { x })
            .collect()
    }

    /// The geometric corner vertex of the closed box `[0, n + 1]^d`.
    pub fn vertex(&self, size: usize) -> Vec<f64> {
        self.flags
            .iter()
            .map(|&f| if f { size as f64 + 1.0 } else { 0.0 })
            .collect()
    }

    /// Taxicab distance from a point to this corner's vertex.
    pub fn l1_distance(&self, size: usize, point: &[f64]) -> f64 {
        point
            .iter()
            .zip(self.vertex(size))
            .map(|(&x, v)| (x - v).abs())
            .sum()
    }

    /// Compact text form, e.g. `"010"`.
    pub fn label(&self) -> String {
        self.flags.iter().map(|&f| if f { '1' } else { '0' }).collect()
    }

    /// Parses the form produced by [`Corner::label`].
    pub fn from_label(label: &str) -> Option<Corner> {
        let mut flags = Vec::with_capacity(label.len());
        for c in label.chars() {
            match c {
                '0' => flags.push(false),
                '1' => flags.push(true),
                _ => return None,
            }
        }
        if flags.is_empty() {
            None
        } else {
            Some(Corner { flags })
        }
    }
}

/// Node and edge permutations induced by reflecting the lattice through a
/// corner.  Both permutations are involutions, map interior nodes to
/// interior nodes and boundary nodes to boundary nodes.
#[derive(Debug, Clone)]
pub struct CornerMap {
    pub corner: Corner,
    /// `node_perm[v]` is the image of node `v` under the reflection.
    pub node_perm: Vec<NodeId>,
    /// `edge_perm[e]` is the image of edge `e` under the reflection.
    pub edge_perm: Vec<EdgeId>,
}

/// An immutable hypercubic lattice graph.
#[derive(Debug)]
pub struct Lattice {
    dim: usize,
    size: usize,
    coords: Vec<Vec<i32>>,
    num_interior: usize,
    edges: Vec<(NodeId, NodeId)>,
    edge_level: Vec<usize>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    node_index: HashMap<Vec<i32>, NodeId>,
    edge_index: HashMap<(NodeId, NodeId), EdgeId>,
    slices: Vec<OnceLock<SliceSets>>,
}

impl Lattice {
    /// Builds the lattice for dimension `d >= 2` and side length `n >= 1`.
    pub fn build(dim: usize, size: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "lattice dimension must be at least 2, got {dim}"
            )));
        }
        if size < 1 {
            return Err(Error::InvalidParameter(format!(
                "lattice size must be at least 1, got {size}"
            )));
        }
        let n = size as i32;

        // Interior nodes in lexicographic order.
        let mut coords: Vec<Vec<i32>> = Vec::new();
        let mut cur = vec![1i32; dim];
        loop {
            coords.push(cur.clone());
            let mut axis = dim;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                if cur[axis] < n {
                    cur[axis] += 1;
                    for c in cur.iter_mut().skip(axis + 1) {
                        *c = 1;
                    }
                    break;
                }
                if axis == 0 {
                    cur.clear();
                }
            }
            if cur.is_empty() {
                break;
            }
        }
        let num_interior = coords.len();

        // Boundary nodes: one coordinate pinned to 0 or n + 1, sorted
        // lexicographically as a class.
        let mut boundary: Vec<Vec<i32>> = Vec::new();
        for axis in 0..dim {
            for &pinned in &[0, n + 1] {
                for interior in &coords[..num_interior] {
                    let mut c = interior.clone();
                    c[axis] = pinned;
                    boundary.push(c);
                }
            }
        }
        boundary.sort();
        boundary.dedup();
        coords.extend(boundary);

        let mut node_index = HashMap::with_capacity(coords.len());
        for (id, c) in coords.iter().enumerate() {
            node_index.insert(c.clone(), id);
        }

        // Every edge has at least one interior endpoint; enumerate from the
        // interior side and canonicalize so the lexicographically smaller
        // endpoint comes first.
        let mut edge_pairs: Vec<(NodeId, NodeId)> = Vec::new();
        for p in 0..num_interior {
            for axis in 0..dim {
                for step in [-1i32, 1] {
                    let mut q = coords[p].clone();
                    q[axis] += step;
                    if let Some(&qid) = node_index.get(&q) {
                        let pair = if coords[p] < coords[qid] { (p, qid) } else { (qid, p) };
                        edge_pairs.push(pair);
                    }
                }
            }
        }
        edge_pairs.sort_by(|a, b| {
            (&coords[a.0], &coords[a.1]).cmp(&(&coords[b.0], &coords[b.1]))
        });
        edge_pairs.dedup();

        let mut adjacency = vec![Vec::new(); coords.len()];
        let mut edge_level = Vec::with_capacity(edge_pairs.len());
        let mut edge_index = HashMap::with_capacity(edge_pairs.len());
        for (e, &(a, b)) in edge_pairs.iter().enumerate() {
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
            let sa: i32 = coords[a].iter().sum();
            let sb: i32 = coords[b].iter().sum();
            edge_level.push(sa.min(sb) as usize);
            let key = if a < b { (a, b) } else { (b, a) };
            edge_index.insert(key, e);
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }

        let max_level = dim * (size + 1);
        let slices = (0..=max_level).map(|_| OnceLock::new()).collect();

        Ok(Lattice {
            dim,
            size,
            coords,
            num_interior,
            edges: edge_pairs,
            edge_level,
            adjacency,
            node_index,
            edge_index,
            slices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Total node count `|D| + |bd D|`.
    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    /// Interior node count `n^d`.
    pub fn num_interior(&self) -> usize {
        self.num_interior
    }

    /// Boundary node count `2 d n^(d-1)`.
    pub fn num_boundary(&self) -> usize {
        self.coords.len() - self.num_interior
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn kind(&self, v: NodeId) -> NodeKind {
        if v < self.num_interior {
            NodeKind::Interior
        } else {
            NodeKind::Boundary
        }
    }

    pub fn is_interior(&self, v: NodeId) -> bool {
        v < self.num_interior
    }

    pub fn coords(&self, v: NodeId) -> &[i32] {
        &self.coords[v]
    }

    /// Sum of the coordinates of a node (its diagonal level).
    pub fn level_of(&self, v: NodeId) -> usize {
        self.coords[v].iter().sum::<i32>() as usize
    }

    /// Looks up a node id by coordinates.
    pub fn node_at(&self, coords: &[i32]) -> Option<NodeId> {
        self.node_index.get(coords).copied()
    }

    /// Interior node ids `0..n^d` in canonical order.
    pub fn interior_nodes(&self) -> std::ops::Range<NodeId> {
        0..self.num_interior
    }

    /// Boundary node ids in canonical order.
    pub fn boundary_nodes(&self) -> std::ops::Range<NodeId> {
        self.num_interior..self.coords.len()
    }

    /// Position of a boundary node within the canonical boundary ordering.
    pub fn boundary_position(&self, v: NodeId) -> Option<usize> {
        if v >= self.num_interior {
            Some(v - self.num_interior)
        } else {
            None
        }
    }

    /// Endpoints of an edge, lexicographically smaller endpoint first.
    pub fn edge(&self, e: EdgeId) -> (NodeId, NodeId) {
        self.edges[e]
    }

    /// The diagonal level of an edge: the smaller of its endpoint levels.
    /// Edges always join consecutive levels, hence this is well defined and
    /// partitions the edge set.
    pub fn edge_level(&self, e: EdgeId) -> usize {
        self.edge_level[e]
    }

    /// Midpoint of an edge in real coordinates.
    pub fn edge_midpoint(&self, e: EdgeId) -> Vec<f64> {
        let (a, b) = self.edges[e];
        self.coords[a]
            .iter()
            .zip(&self.coords[b])
            .map(|(&x, &y)| f64::from(x + y) / 2.0)
            .collect()
    }

    /// Looks up an edge id from its endpoints, in either order.
    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_index.get(&key).copied()
    }

    /// Neighbors of a node with the connecting edge ids, sorted by neighbor.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[v]
    }

    /// The unique neighbor of a boundary node (always interior).
    pub fn boundary_neighbor(&self, v: NodeId) -> (NodeId, EdgeId) {
        debug_assert!(!self.is_interior(v));
        self.adjacency[v][0]
    }

    /// Largest meaningful level index: boundary levels run up to
    /// `d * n + 1 <= d * (n + 1)`.
    pub fn max_level(&self) -> usize {
        self.dim * (self.size + 1)
    }

    /// Classifies nodes by diagonal level `t`, memoized per level.
    pub fn slice_sets(&self, t: usize) -> Result<&SliceSets> {
        if t > self.max_level() {
            return Err(Error::InvalidParameter(format!(
                "level {t} exceeds maximum {}",
                self.max_level()
            )));
        }
        Ok(self.slices[t].get_or_init(|| self.compute_slice_sets(t)))
    }

    fn compute_slice_sets(&self, t: usize) -> SliceSets {
        let mut s = SliceSets {
            level: t,
            interior: Vec::new(),
            boundary: Vec::new(),
            boundary_low: Vec::new(),
            boundary_high: Vec::new(),
            corner_boundary: Vec::new(),
            interior_cum: Vec::new(),
            boundary_low_cum: Vec::new(),
            boundary_high_cum: Vec::new(),
            corner_boundary_cum: Vec::new(),
        };
        let high = self.size as i32 + 1;
        for v in 0..self.num_nodes() {
            let level = self.level_of(v);
            if self.is_interior(v) {
                if level == t {
                    s.interior.push(v);
                }
                if level <= t {
                    s.interior_cum.push(v);
                }
            } else {
                let low = self.coords[v].contains(&0);
                debug_assert_ne!(low, self.coords[v].contains(&high));
                if level == t {
                    s.boundary.push(v);
                    if low {
                        s.boundary_low.push(v);
                    } else {
                        s.boundary_high.push(v);
                    }
                }
                if low {
                    if level == t {
                        s.corner_boundary.push(v);
                    }
                    if level <= t {
                        s.boundary_low_cum.push(v);
                        s.corner_boundary_cum.push(v);
                    }
                } else {
                    if level == t + 1 {
                        s.corner_boundary.push(v);
                    }
                    if level <= t {
                        s.boundary_high_cum.push(v);
                    }
                    if level <= t + 1 {
                        s.corner_boundary_cum.push(v);
                    }
                }
            }
        }
        s.corner_boundary.sort_unstable();
        s.corner_boundary_cum.sort_unstable();
        s
    }

    /// Builds the node and edge permutations for a corner reflection.
    pub fn corner_map(&self, corner: &Corner) -> Result<CornerMap> {
        if corner.dim() != self.dim {
            return Err(Error::LatticeMismatch(format!(
                "corner has dimension {}, lattice has {}",
                corner.dim(),
                self.dim
            )));
        }
        let node_perm: Vec<NodeId> = (0..self.num_nodes())
            .map(|v| {
                let image = corner.reflect(self.size, &self.coords[v]);
                self.node_index[&image]
            })
            .collect();
        let edge_perm: Vec<EdgeId> = (0..self.num_edges())
            .map(|e| {
                let (a, b) = self.edges[e];
                self.edge_between(node_perm[a], node_perm[b])
                    .expect("reflection preserves adjacency")
            })
            .collect();
        Ok(CornerMap {
            corner: corner.clone(),
            node_perm,
            edge_perm,
        })
    }
}
