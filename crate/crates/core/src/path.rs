//! Paths on a surface: weight, concatenation/reversal, Dijkstra, and
//! reference paths threaded through keypoints.
//!
//! A path is a node sequence and may revisit nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::complex::{SimplicialSurface, VertexId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<VertexId>", into = "Vec<VertexId>")]
pub struct Path {
    nodes: Vec<VertexId>,
}

impl TryFrom<Vec<VertexId>> for Path {
    type Error = Error;

    fn try_from(nodes: Vec<VertexId>) -> Result<Self> {
        Path::new(nodes)
    }
}

impl From<Path> for Vec<VertexId> {
    fn from(p: Path) -> Self {
        p.nodes
    }
}

impl Path {
    /// A node sequence; only non-emptiness is checked here; adjacency
    /// is checked against a surface by [`Path::validate`].
    pub fn new(nodes: Vec<VertexId>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyPath);
        }
        Ok(Self { nodes })
    }

    pub fn single(v: VertexId) -> Self {
        Self { nodes: vec![v] }
    }

    pub fn nodes(&self) -> &[VertexId] {
        &self.nodes
    }

    pub fn source(&self) -> VertexId {
        self.nodes[0]
    }

    pub fn dest(&self) -> VertexId {
        *self.nodes.last().expect("paths are non-empty")
    }

    /// Number of edges traversed.
    pub fn num_edges(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn validate(&self, surface: &SimplicialSurface) -> Result<()> {
        if let Some(&v) = self.nodes.iter().find(|v| !surface.contains(**v)) {
            return Err(Error::UnknownVertex(v));
        }
        for pair in self.nodes.windows(2) {
            if surface.edge_between(pair[0], pair[1]).is_none() {
                return Err(Error::MissingEdge(pair[0], pair[1]));
            }
        }
        Ok(())
    }

    /// `self + other`; the junction node appears once.
    pub fn concat(&self, other: &Path) -> Result<Path> {
        if self.dest() != other.source() {
            return Err(Error::JunctionMismatch {
                left: self.dest(),
                right: other.source(),
            });
        }
        let mut nodes = Vec::with_capacity(self.nodes.len() + other.nodes.len() - 1);
        nodes.extend_from_slice(&self.nodes);
        nodes.extend_from_slice(&other.nodes[1..]);
        Ok(Path { nodes })
    }

    /// `-self`
    pub fn reversed(&self) -> Path {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Path { nodes }
    }

    /// `self - other = self + (-other)`
    pub fn subtract(&self, other: &Path) -> Result<Path> {
        self.concat(&other.reversed())
    }

    /// `self + (v)`, requiring an edge from the last node to `v`.
    pub fn append_node(&self, surface: &SimplicialSurface, v: VertexId) -> Result<Path> {
        let last = self.dest();
        if surface.edge_between(last, v).is_none() {
            return Err(Error::MissingEdge(last, v));
        }
        let mut nodes = self.nodes.clone();
        nodes.push(v);
        Ok(Path { nodes })
    }
}

/// `W(τ)`: sum of edge weights along the path.
pub fn path_weight(surface: &SimplicialSurface, path: &Path) -> Result<f64> {
    let mut total = 0.0;
    for pair in path.nodes().windows(2) {
        let nb = surface
            .edge_between(pair[0], pair[1])
            .ok_or(Error::MissingEdge(pair[0], pair[1]))?;
        total += surface.edges()[nb.edge].weight;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path tree.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    source: VertexId,
    dist: Vec<f64>,
    prev: Vec<Option<VertexId>>,
    pops: usize,
}

impl ShortestPathTree {
    pub fn distance(&self, v: VertexId) -> f64 {
        self.dist[v.0]
    }

    /// Number of vertices settled before the search stopped.
    pub fn pops(&self) -> usize {
        self.pops
    }

    pub fn path_to(&self, target: VertexId) -> Result<Path> {
        if !self.dist[target.0].is_finite() {
            return Err(Error::Unreachable(target, self.source));
        }
        let mut nodes = vec![target];
        let mut v = target;
        while let Some(p) = self.prev[v.0] {
            nodes.push(p);
            v = p;
        }
        nodes.reverse();
        Path::new(nodes)
    }
}

/// Dijkstra from `source`, stopping early once `target` is settled.
///
/// Ties are broken towards the smaller vertex index and a predecessor is only
/// replaced on strict improvement, so the tree is deterministic.
pub fn dijkstra(
    surface: &SimplicialSurface,
    source: VertexId,
    target: Option<VertexId>,
) -> Result<ShortestPathTree> {
    for v in std::iter::once(source).chain(target) {
        if !surface.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
    }
    let n = surface.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut pops = 0;
    dist[source.0] = 0.0;
    heap.push(QueueEntry {
        dist: 0.0,
        vertex: source.0,
    });
    while let Some(QueueEntry { dist: d, vertex: v }) = heap.pop() {
        if done[v] || d > dist[v] {
            continue;
        }
        done[v] = true;
        pops += 1;
        if Some(VertexId(v)) == target {
            break;
        }
        for nb in surface.neighbors(VertexId(v)) {
            let u = nb.vertex.0;
            let candidate = d + surface.edges()[nb.edge].weight;
            if !done[u] && candidate < dist[u] {
                dist[u] = candidate;
                prev[u] = Some(VertexId(v));
                heap.push(QueueEntry {
                    dist: candidate,
                    vertex: u,
                });
            }
        }
    }
    Ok(ShortestPathTree {
        source,
        dist,
        prev,
        pops,
    })
}

pub fn shortest_path(
    surface: &SimplicialSurface,
    source: VertexId,
    dest: VertexId,
) -> Result<Path> {
    dijkstra(surface, source, Some(dest))?.path_to(dest)
}

/// Ordered waypoints for a reference path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keypoints(Vec<VertexId>);

impl Keypoints {
    pub fn new(waypoints: Vec<VertexId>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidSearch(
                "keypoints need at least two waypoints".into(),
            ));
        }
        Ok(Self(waypoints))
    }

    pub fn waypoints(&self) -> &[VertexId] {
        &self.0
    }
}

/// Concatenation of shortest paths between consecutive keypoints.
pub fn reference_from_keypoints(surface: &SimplicialSurface, kps: &Keypoints) -> Result<Path> {
    let waypoints = kps.waypoints();
    let mut path = Path::single(waypoints[0]);
    if !surface.contains(waypoints[0]) {
        return Err(Error::UnknownVertex(waypoints[0]));
    }
    for pair in waypoints.windows(2) {
        let segment = shortest_path(surface, pair[0], pair[1])?;
        path = path.concat(&segment)?;
    }
    Ok(path)
}
