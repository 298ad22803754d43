//! H*: best-first search on the soft homology cost `W + α·Δγ`.
//!
//! Every node carries the weight and harmonic projection of its best partial
//! path from the source. A node's cost is its weight plus `α` times the
//! distance between that projection and the reference projection. Nodes are
//! settled in order of least cost and relaxed only while unsettled; the cost
//! has no optimal substructure, so the result is a heuristic solution.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::complex::{SimplicialSurface, VertexId};
use crate::error::{Error, Result};
use crate::homology::{distance, path_projection, HarmonicBasis, Projection};
use crate::path::{path_weight, Path};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub path: Path,
    pub length: f64,
    pub proj_diff: f64,
    pub total_cost: f64,
    pub visited_count: usize,
}

/// One settled node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub pop_index: usize,
    pub vertex: usize,
    pub weight: f64,
    pub proj_diff: f64,
    pub cost: f64,
}

/// `(W(τ), Δγ(τ, τ̄), C^α(τ, τ̄))` for a full path.
pub fn soft_cost(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    path: &Path,
    target: &Projection,
    alpha: f64,
) -> Result<(f64, f64, f64)> {
    let length = path_weight(surface, path)?;
    let proj = path_projection(surface, basis, path)?;
    let diff = distance(&proj.0, &target.0);
    Ok((length, diff, length + alpha * diff))
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    cost: f64,
    weight: f64,
    vertex: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    // Min-heap on (cost, weight, vertex).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.weight.total_cmp(&self.weight))
            .then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_inputs(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    reference: &Path,
    alpha: f64,
) -> Result<()> {
    for v in [source, dest] {
        if !surface.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
    }
    if source == dest {
        return Err(Error::InvalidSearch(
            "source and destination coincide".into(),
        ));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidSearch(format!(
            "alpha must be finite and non-negative, got {alpha}"
        )));
    }
    if basis.num_edges() != surface.num_edges() {
        return Err(Error::DimensionMismatch {
            expected: surface.num_edges(),
            found: basis.num_edges(),
        });
    }
    if reference.source() != source || reference.dest() != dest {
        return Err(Error::EndpointMismatch(
            reference.source(),
            reference.dest(),
            source,
            dest,
        ));
    }
    reference.validate(surface)
}

/// `H*(source, dest, reference)` at penalty weight `alpha`.
pub fn hstar_search(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    reference: &Path,
    alpha: f64,
) -> Result<SearchResult> {
    check_inputs(surface, basis, source, dest, reference, alpha)?;
    let target = path_projection(surface, basis, reference)?;
    search(surface, basis, source, dest, &target, alpha, None)
}

/// [`hstar_search`], also recording every settled node.
pub fn hstar_search_traced(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    reference: &Path,
    alpha: f64,
) -> Result<(SearchResult, Vec<TraceRecord>)> {
    check_inputs(surface, basis, source, dest, reference, alpha)?;
    let target = path_projection(surface, basis, reference)?;
    let mut trace = Vec::new();
    let result = search(
        surface,
        basis,
        source,
        dest,
        &target,
        alpha,
        Some(&mut trace),
    )?;
    Ok((result, trace))
}

fn search(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    target: &Projection,
    alpha: f64,
    mut trace: Option<&mut Vec<TraceRecord>>,
) -> Result<SearchResult> {
    let n = surface.num_vertices();
    let d = basis.dim();
    let mut weight = vec![f64::INFINITY; n];
    let mut cost = vec![f64::INFINITY; n];
    let mut proj = vec![0.0; n * d];
    let mut prev: Vec<Option<VertexId>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut heap = BinaryHeap::new();

    weight[source.0] = 0.0;
    cost[source.0] = alpha * target.norm();
    heap.push(Entry {
        cost: cost[source.0],
        weight: 0.0,
        vertex: source.0,
    });

    let mut pops = 0;
    let mut scratch = vec![0.0; d];
    while let Some(entry) = heap.pop() {
        let v = entry.vertex;
        if visited[v] || entry.cost != cost[v] || entry.weight != weight[v] {
            continue;
        }
        visited[v] = true;
        pops += 1;
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(TraceRecord {
                pop_index: pops - 1,
                vertex: v,
                weight: weight[v],
                proj_diff: distance(&proj[v * d..(v + 1) * d], &target.0),
                cost: cost[v],
            });
        }
        if v == dest.0 {
            break;
        }
        for nb in surface.neighbors(VertexId(v)) {
            let u = nb.vertex.0;
            if visited[u] {
                continue;
            }
            let w = weight[v] + surface.edges()[nb.edge].weight;
            for ((s, g), h) in scratch
                .iter_mut()
                .zip(&proj[v * d..(v + 1) * d])
                .zip(basis.edge_values(nb.edge))
            {
                *s = g + nb.sign * h;
            }
            let c = w + alpha * distance(&scratch, &target.0);
            if c < cost[u] {
                cost[u] = c;
                weight[u] = w;
                proj[u * d..(u + 1) * d].copy_from_slice(&scratch);
                prev[u] = Some(VertexId(v));
                heap.push(Entry {
                    cost: c,
                    weight: w,
                    vertex: u,
                });
            }
        }
    }
    if !visited[dest.0] {
        return Err(Error::Unreachable(dest, source));
    }

    let mut nodes = vec![dest];
    let mut v = dest;
    while let Some(p) = prev[v.0] {
        nodes.push(p);
        v = p;
    }
    nodes.reverse();
    let path = Path::new(nodes)?;
    let length = weight[dest.0];
    let proj_diff = distance(&proj[dest.0 * d..(dest.0 + 1) * d], &target.0);
    Ok(SearchResult {
        path,
        length,
        proj_diff,
        total_cost: length + alpha * proj_diff,
        visited_count: pops,
    })
}
