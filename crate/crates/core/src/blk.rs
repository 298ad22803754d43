//! Exact baseline: uniform-cost search over `(vertex, homology signature)`
//! pairs, plus the penalty threshold above which the soft and hard
//! homology constraints agree.
//!
//! A signature is the harmonic projection of the partial path, quantized to
//! [`SIGNATURE_QUANTUM`]. Augmented nodes whose projection leaves the winding
//! box are discarded. The box spans `{0, γ̄}` and is widened by one full
//! loop value per hole, which rules out paths that wind around holes
//! repeatedly and keeps the augmented graph finite.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use crate::complex::{SimplicialSurface, VertexId};
use crate::error::{Error, Result};
use crate::homology::{distance, hole_loop_values, path_projection, HarmonicBasis, Projection};
use crate::hstar::SearchResult;
use crate::path::Path;

/// Absolute per-coordinate quantum for signature keys.
pub const SIGNATURE_QUANTUM: f64 = 1e-6;

/// Slack added to each side of the winding box to absorb round-off.
const BOX_SLACK: f64 = 1e-7;

/// Quantized projection, `round(γ / quantum)` per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignatureKey(pub Vec<i64>);

impl SignatureKey {
    pub fn of(projection: &[f64]) -> Self {
        Self(
            projection
                .iter()
                .map(|g| (g / SIGNATURE_QUANTUM).round() as i64)
                .collect(),
        )
    }
}

impl fmt::Display for SignatureKey {
    /// Colon-joined integers; the empty key (no holes) prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

/// Shortest path found for one homology class at the destination.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRecord {
    pub signature_key: SignatureKey,
    pub shortest_length: f64,
    pub representative: Path,
    pub projection: Projection,
    pub discovery_rank: usize,
}

/// Axis-aligned box in projection space.
#[derive(Debug, Clone, PartialEq)]
pub struct WindingBound {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl WindingBound {
    /// Box spanned by `0` and `target`, widened per coordinate by
    /// `Σ_d |λ_d|`.
    pub fn around(target: &Projection, loop_values: &[Projection]) -> Self {
        let dim = target.dim();
        let mut lower = Vec::with_capacity(dim);
        let mut upper = Vec::with_capacity(dim);
        for j in 0..dim {
            let margin: f64 = loop_values.iter().map(|l| l.0[j].abs()).sum::<f64>() + BOX_SLACK;
            lower.push(target.0[j].min(0.0) - margin);
            upper.push(target.0[j].max(0.0) + margin);
        }
        Self { lower, upper }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlkOutcome {
    /// The shortest path homologous to the reference; `visited_count` is the
    /// number of augmented nodes popped.
    pub result: SearchResult,
    /// Other classes reaching the destination before the target, in pop
    /// order.
    pub classes: Vec<ClassRecord>,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    dist: f64,
    vertex: usize,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.vertex.cmp(&self.vertex))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct AugmentedGraph<'a> {
    surface: &'a SimplicialSurface,
    basis: &'a HarmonicBasis,
    bound: WindingBound,
    index: HashMap<(usize, SignatureKey), usize>,
    vertex: Vec<usize>,
    key: Vec<SignatureKey>,
    proj: Vec<f64>,
    dist: Vec<f64>,
    prev: Vec<Option<usize>>,
    closed: Vec<bool>,
    heap: BinaryHeap<Entry>,
    pops: usize,
}

impl<'a> AugmentedGraph<'a> {
    fn new(
        surface: &'a SimplicialSurface,
        basis: &'a HarmonicBasis,
        source: VertexId,
        bound: WindingBound,
    ) -> Self {
        let mut g = Self {
            surface,
            basis,
            bound,
            index: HashMap::new(),
            vertex: Vec::new(),
            key: Vec::new(),
            proj: Vec::new(),
            dist: Vec::new(),
            prev: Vec::new(),
            closed: Vec::new(),
            heap: BinaryHeap::new(),
            pops: 0,
        };
        let zero = vec![0.0; basis.dim()];
        let start = g.node(source.0, &zero);
        g.dist[start] = 0.0;
        g.heap.push(Entry {
            dist: 0.0,
            vertex: source.0,
            node: start,
        });
        g
    }

    fn node(&mut self, vertex: usize, proj: &[f64]) -> usize {
        let key = SignatureKey::of(proj);
        if let Some(&id) = self.index.get(&(vertex, key.clone())) {
            return id;
        }
        let id = self.vertex.len();
        self.index.insert((vertex, key.clone()), id);
        self.vertex.push(vertex);
        self.key.push(key);
        self.proj.extend_from_slice(proj);
        self.dist.push(f64::INFINITY);
        self.prev.push(None);
        self.closed.push(false);
        id
    }

    /// Pops the next augmented node and relaxes its neighbors.
    fn step(&mut self) -> Option<usize> {
        let d = self.basis.dim();
        let mut scratch = vec![0.0; d];
        while let Some(entry) = self.heap.pop() {
            let id = entry.node;
            if self.closed[id] || entry.dist > self.dist[id] {
                continue;
            }
            self.closed[id] = true;
            self.pops += 1;
            let v = self.vertex[id];
            for nb in self.surface.neighbors(VertexId(v)) {
                for ((s, g), h) in scratch
                    .iter_mut()
                    .zip(&self.proj[id * d..(id + 1) * d])
                    .zip(self.basis.edge_values(nb.edge))
                {
                    *s = g + nb.sign * h;
                }
                if !self.bound.contains(&scratch) {
                    continue;
                }
                let next = self.node(nb.vertex.0, &scratch);
                let candidate = self.dist[id] + self.surface.edges()[nb.edge].weight;
                if !self.closed[next] && candidate < self.dist[next] {
                    self.dist[next] = candidate;
                    self.prev[next] = Some(id);
                    self.heap.push(Entry {
                        dist: candidate,
                        vertex: nb.vertex.0,
                        node: next,
                    });
                }
            }
            return Some(id);
        }
        None
    }

    fn path_to(&self, id: usize) -> Result<Path> {
        let mut nodes = vec![VertexId(self.vertex[id])];
        let mut cur = id;
        while let Some(p) = self.prev[cur] {
            nodes.push(VertexId(self.vertex[p]));
            cur = p;
        }
        nodes.reverse();
        Path::new(nodes)
    }

    fn record(&self, id: usize, rank: usize) -> Result<ClassRecord> {
        let d = self.basis.dim();
        Ok(ClassRecord {
            signature_key: self.key[id].clone(),
            shortest_length: self.dist[id],
            representative: self.path_to(id)?,
            projection: Projection(self.proj[id * d..(id + 1) * d].to_vec()),
            discovery_rank: rank,
        })
    }
}

fn check_endpoints(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
) -> Result<()> {
    for v in [source, dest] {
        if !surface.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
    }
    if basis.num_edges() != surface.num_edges() {
        return Err(Error::DimensionMismatch {
            expected: surface.num_edges(),
            found: basis.num_edges(),
        });
    }
    Ok(())
}

/// Shortest path homologous to `reference`, with every other destination
/// class discovered on the way.
pub fn blk_search(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    reference: &Path,
) -> Result<BlkOutcome> {
    check_endpoints(surface, basis, source, dest)?;
    if reference.source() != source || reference.dest() != dest {
        return Err(Error::EndpointMismatch(
            reference.source(),
            reference.dest(),
            source,
            dest,
        ));
    }
    let target = path_projection(surface, basis, reference)?;
    let target_key = SignatureKey::of(&target.0);
    let bound = WindingBound::around(&target, &hole_loop_values(surface, basis)?);
    let mut graph = AugmentedGraph::new(surface, basis, source, bound);

    let mut classes = Vec::new();
    while let Some(id) = graph.step() {
        if graph.vertex[id] != dest.0 {
            continue;
        }
        if graph.key[id] == target_key {
            let found = graph.record(id, classes.len())?;
            let proj_diff = distance(&found.projection.0, &target.0);
            let result = SearchResult {
                path: found.representative,
                length: found.shortest_length,
                proj_diff,
                total_cost: found.shortest_length,
                visited_count: graph.pops,
            };
            return Ok(BlkOutcome { result, classes });
        }
        classes.push(graph.record(id, classes.len())?);
    }
    Err(Error::SignatureBoundExhausted)
}

/// Exhausts the bounded augmented graph and returns the shortest path of
/// every destination class inside `bound`, in discovery order.
pub fn blk_enumerate_classes(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    bound: WindingBound,
) -> Result<Vec<ClassRecord>> {
    check_endpoints(surface, basis, source, dest)?;
    let mut graph = AugmentedGraph::new(surface, basis, source, bound);
    let mut classes = Vec::new();
    while let Some(id) = graph.step() {
        if graph.vertex[id] == dest.0 {
            classes.push(graph.record(id, classes.len())?);
        }
    }
    Ok(classes)
}

/// Smallest penalty weight beyond which the target class minimises the soft
/// cost: `max_i (W(τ*) - W(τ*_i)) / Δγ(τ*_i, τ̄)` over classes shorter than
/// the target, or 0 when there are none.
pub fn alpha_threshold(
    records: &[ClassRecord],
    target_length: f64,
    reference_proj: &Projection,
) -> Result<f64> {
    let mut best = 0.0f64;
    for r in records.iter().filter(|r| r.shortest_length < target_length) {
        let diff = distance(&r.projection.0, &reference_proj.0);
        if diff <= SIGNATURE_QUANTUM {
            return Err(Error::HomologyBookkeeping {
                key: r.signature_key.to_string(),
            });
        }
        best = best.max((target_length - r.shortest_length) / diff);
    }
    Ok(best)
}
