//! Fortified rollout around H*, with optional projection-based pruning of
//! the candidate neighborhood.
//!
//! At each stage the partial path is extended by the neighbor whose
//! completion `τ_k + (v) + H*(v, v_f, τ̄_k(v))` has the least soft cost. The
//! best complete path seen so far (the incumbent) is kept and returned, so
//! the output never costs more than plain H*.

use serde::Serialize;

use crate::complex::{SimplicialSurface, VertexId};
use crate::error::{Error, Result};
use crate::homology::{distance, path_projection, HarmonicBasis};
use crate::hstar::{hstar_search, hstar_search_traced, soft_cost, SearchResult, TraceRecord};
use crate::path::Path;

/// Stage limit as a multiple of the vertex count.
pub const STAGE_LIMIT_FACTOR: usize = 4;

/// Default pruning tolerance as a fraction of `‖γ̄‖`.
pub const DEFAULT_EPSILON_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    /// The incumbent; `visited_count` sums the pops of every inner H* run.
    pub result: SearchResult,
    pub stages: usize,
    pub stage_limit_hit: bool,
    /// Incumbent cost after initialisation and after every stage.
    pub incumbent_costs: Vec<f64>,
    pub trace: Vec<StageRecord>,
    /// Settled nodes of the winning inner search at every stage; empty
    /// unless [`RolloutOptions::trace`] is set.
    pub pop_trace: Vec<RolloutTraceRecord>,
}

/// Best candidate of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    pub vertex: usize,
    pub candidate_cost: f64,
    pub incumbent_cost: f64,
    pub inner_pops: usize,
}

/// One settled node of an inner H* run, tagged with its stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RolloutTraceRecord {
    pub stage: usize,
    pub pop_index: usize,
    pub vertex: usize,
    pub weight: f64,
    pub proj_diff: f64,
    pub cost: f64,
}

/// `τ̄_k(v) = (v) - τ_k + τ̄`: from `v` back along the reversed partial path
/// to the source, then along the reference. When `v` is the last node of the
/// partial path the leading `(v)` step is dropped.
pub fn stage_reference(
    surface: &SimplicialSurface,
    partial: &Path,
    v: VertexId,
    reference: &Path,
) -> Result<Path> {
    let back = partial.reversed();
    let lead = if v == partial.dest() {
        back
    } else {
        if surface.edge_between(v, partial.dest()).is_none() {
            return Err(Error::MissingEdge(partial.dest(), v));
        }
        Path::single(v)
            .append_node(surface, partial.dest())?
            .concat(&back)?
    };
    lead.concat(reference)
}

/// Tuning for [`rollout`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RolloutOptions {
    /// Pruning tolerance `ε`; `None` disables pruning.
    pub epsilon: Option<f64>,
    /// Maximum number of nodes in the partial path; defaults to
    /// [`STAGE_LIMIT_FACTOR`] times the vertex count.
    pub stage_limit: Option<usize>,
    /// Record the per-pop trace of each stage's winning candidate.
    pub trace: bool,
}

/// `RH*`
pub fn fortified_rollout(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    reference: &Path,
    alpha: f64,
) -> Result<RolloutResult> {
    rollout(
        surface,
        basis,
        source,
        dest,
        reference,
        alpha,
        RolloutOptions::default(),
    )
}

/// `PRH*`
pub fn pruned_rollout(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    reference: &Path,
    alpha: f64,
    epsilon: f64,
) -> Result<RolloutResult> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidSearch(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let options = RolloutOptions {
        epsilon: Some(epsilon),
        ..Default::default()
    };
    rollout(surface, basis, source, dest, reference, alpha, options)
}

/// `ε = 0.05·‖γ̄‖`.
pub fn default_epsilon(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    reference: &Path,
) -> Result<f64> {
    Ok(DEFAULT_EPSILON_FRACTION * path_projection(surface, basis, reference)?.norm())
}

pub fn rollout(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    reference: &Path,
    alpha: f64,
    options: RolloutOptions,
) -> Result<RolloutResult> {
    let base = hstar_search(surface, basis, source, dest, reference, alpha)?;
    let target = path_projection(surface, basis, reference)?;
    let stage_limit = options
        .stage_limit
        .unwrap_or(STAGE_LIMIT_FACTOR * surface.num_vertices())
        .max(2);
    let d = basis.dim();

    let mut visits = base.visited_count;
    let mut incumbent = base.path;
    let mut incumbent_cost = base.total_cost;
    let mut incumbent_costs = vec![incumbent_cost];
    let mut trace = Vec::new();
    let mut pop_trace = Vec::new();

    let mut partial = Path::single(source);
    let mut partial_proj = vec![0.0; d];
    let mut stage_limit_hit = false;
    let mut stages = 0;
    let mut scratch = vec![0.0; d];

    while partial.dest() != dest {
        if partial.nodes().len() >= stage_limit {
            stage_limit_hit = true;
            break;
        }
        let end = partial.dest();
        let neighbors = surface.neighbors(end);
        let mut candidates: Vec<usize> = (0..neighbors.len()).collect();

        if let Some(eps) = options.epsilon {
            let current = distance(&partial_proj, &target.0);
            let pruned: Vec<usize> = candidates
                .iter()
                .copied()
                .filter(|&i| {
                    let nb = neighbors[i];
                    for ((s, g), h) in scratch
                        .iter_mut()
                        .zip(&partial_proj)
                        .zip(basis.edge_values(nb.edge))
                    {
                        *s = g + nb.sign * h;
                    }
                    distance(&scratch, &target.0) < current + eps
                })
                .collect();
            if !pruned.is_empty() {
                candidates = pruned;
            }
        }
        // Stepping straight back to the previous node is skipped unless it
        // is the only option.
        if let Some(&back) = partial.nodes().iter().rev().nth(1) {
            if candidates.len() > 1 {
                candidates.retain(|&i| neighbors[i].vertex != back);
            }
        }

        let mut best: Option<(usize, Path, f64, Vec<TraceRecord>)> = None;
        let mut stage_pops = 0;
        for &i in &candidates {
            let v = neighbors[i].vertex;
            let step = partial.append_node(surface, v)?;
            let (full, inner_trace) = if v == dest {
                (step, Vec::new())
            } else {
                let stage_ref = stage_reference(surface, &partial, v, reference)?;
                let (inner, inner_trace) = if options.trace {
                    hstar_search_traced(surface, basis, v, dest, &stage_ref, alpha)?
                } else {
                    (
                        hstar_search(surface, basis, v, dest, &stage_ref, alpha)?,
                        Vec::new(),
                    )
                };
                stage_pops += inner.visited_count;
                (step.concat(&inner.path)?, inner_trace)
            };
            let (_, _, cost) = soft_cost(surface, basis, &full, &target, alpha)?;
            if best.as_ref().is_none_or(|b| cost < b.2) {
                best = Some((i, full, cost, inner_trace));
            }
        }
        visits += stage_pops;
        let (i, full, cost, inner_trace) = best.expect("every surface vertex has a neighbor");
        let nb = neighbors[i];
        partial = partial.append_node(surface, nb.vertex)?;
        for (g, h) in partial_proj.iter_mut().zip(basis.edge_values(nb.edge)) {
            *g += nb.sign * h;
        }
        if cost < incumbent_cost {
            incumbent = full;
            incumbent_cost = cost;
        }
        stages += 1;
        pop_trace.extend(inner_trace.into_iter().map(|r| RolloutTraceRecord {
            stage: stages,
            pop_index: r.pop_index,
            vertex: r.vertex,
            weight: r.weight,
            proj_diff: r.proj_diff,
            cost: r.cost,
        }));
        incumbent_costs.push(incumbent_cost);
        trace.push(StageRecord {
            stage: stages,
            vertex: nb.vertex.0,
            candidate_cost: cost,
            incumbent_cost,
            inner_pops: stage_pops,
        });
    }

    let (length, proj_diff, total_cost) = soft_cost(surface, basis, &incumbent, &target, alpha)?;
    Ok(RolloutResult {
        result: SearchResult {
            path: incumbent,
            length,
            proj_diff,
            total_cost,
            visited_count: visits,
        },
        stages,
        stage_limit_hit,
        incumbent_costs,
        trace,
        pop_trace,
    })
}
