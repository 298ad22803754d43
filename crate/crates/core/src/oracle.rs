//! Brute-force ground truth for tiny surfaces.
//!
//! Simple paths are enumerated exhaustively and grouped by harmonic
//! signature. The grouping is checked against an independent membership test
//! for `im(∂2)` that solves a least-squares problem.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::blk::SignatureKey;
use crate::complex::{boundary_matrix, SimplicialSurface, VertexId};
use crate::error::{Error, Result};
use crate::homology::{chain_of_path, harmonic_projection, ChainVector, HarmonicBasis, Projection};
use crate::path::{path_weight, Path};

/// Largest surface the enumerator accepts.
pub const MAX_ORACLE_VERTICES: usize = 30;

/// Residual below which a chain is taken to lie in `im(∂2)`.
pub const BOUNDARY_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Orthogonal projector onto the column space of `∂2`.
#[derive(Debug, Clone)]
pub struct BoundarySpace {
    basis: DMatrix<f64>,
}

impl BoundarySpace {
    pub fn new(surface: &SimplicialSurface) -> Result<Self> {
        let d2 = boundary_matrix(surface, 2)?.to_dense();
        if d2.ncols() == 0 {
            return Ok(Self {
                basis: DMatrix::zeros(d2.nrows(), 0),
            });
        }
        let rows = d2.nrows();
        let svd = d2.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let cutoff = 1e-10 * svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > cutoff)
            .collect();
        let mut basis = DMatrix::zeros(rows, keep.len());
        for (k, &i) in keep.iter().enumerate() {
            basis.set_column(k, &u.column(i));
        }
        Ok(Self { basis })
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `min_y ‖∂2 y - x‖`.
    pub fn residual(&self, chain: &ChainVector) -> f64 {
        let x = DVector::from_column_slice(chain.coefficients());
        let coeffs = self.basis.transpose() * &x;
        (x - &self.basis * coeffs).norm()
    }

    pub fn contains(&self, chain: &ChainVector) -> bool {
        self.residual(chain) < BOUNDARY_RESIDUAL_TOLERANCE
    }
}

fn guard(surface: &SimplicialSurface, max_nodes: usize) -> Result<()> {
    if max_nodes > MAX_ORACLE_VERTICES {
        return Err(Error::SizeGuard(format!(
            "max_nodes {max_nodes} exceeds the limit of {MAX_ORACLE_VERTICES}"
        )));
    }
    if surface.num_vertices() > max_nodes {
        return Err(Error::SizeGuard(format!(
            "surface has {} vertices, more than max_nodes = {max_nodes}",
            surface.num_vertices()
        )));
    }
    Ok(())
}

/// Calls `visit` on every simple path from `source` to `dest`, in DFS order
/// with neighbors taken by increasing index.
pub fn for_each_simple_path(
    surface: &SimplicialSurface,
    source: VertexId,
    dest: VertexId,
    max_nodes: usize,
    mut visit: impl FnMut(&[VertexId]),
) -> Result<()> {
    guard(surface, max_nodes)?;
    for v in [source, dest] {
        if !surface.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
    }
    let mut on_path = vec![false; surface.num_vertices()];
    let mut stack = vec![source];
    // Per-depth cursor into the neighbor list.
    let mut cursor = vec![0usize];
    on_path[source.0] = true;
    if source == dest {
        visit(&stack);
        return Ok(());
    }
    while let Some(&top) = stack.last() {
        let depth = stack.len() - 1;
        let neighbors = surface.neighbors(top);
        if cursor[depth] == neighbors.len() {
            on_path[top.0] = false;
            stack.pop();
            cursor.pop();
            continue;
        }
        let next = neighbors[cursor[depth]].vertex;
        cursor[depth] += 1;
        if on_path[next.0] {
            continue;
        }
        stack.push(next);
        if next == dest {
            visit(&stack);
            stack.pop();
        } else {
            on_path[next.0] = true;
            cursor.push(0);
        }
    }
    Ok(())
}

pub fn enumerate_simple_paths(
    surface: &SimplicialSurface,
    source: VertexId,
    dest: VertexId,
    max_nodes: usize,
) -> Result<Vec<Path>> {
    let mut out = Vec::new();
    for_each_simple_path(surface, source, dest, max_nodes, |nodes| {
        out.push(Path::new(nodes.to_vec()).expect("non-empty"));
    })?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassEntry {
    pub shortest_length: f64,
    pub representative: Path,
    pub member_count: usize,
    pub projection: Projection,
    /// Longest member; used for the within-class cross-check.
    pub witness: Path,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassTable {
    pub classes: BTreeMap<SignatureKey, ClassEntry>,
}

impl ClassTable {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn get(&self, key: &SignatureKey) -> Option<&ClassEntry> {
        self.classes.get(key)
    }

    pub fn total_paths(&self) -> usize {
        self.classes.values().map(|c| c.member_count).sum()
    }
}

/// Groups every simple path by harmonic signature.
///
/// Cross-checks with the residual test: the representative and the witness
/// of each class must differ by a boundary, and representatives of distinct
/// classes must not.
pub fn enumerate_classes(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    source: VertexId,
    dest: VertexId,
    max_nodes: usize,
) -> Result<ClassTable> {
    let mut table = ClassTable::default();
    let mut failure = None;
    for_each_simple_path(surface, source, dest, max_nodes, |nodes| {
        if failure.is_some() {
            return;
        }
        let path = Path::new(nodes.to_vec()).expect("non-empty");
        let classify = || -> Result<(f64, Projection)> {
            let chain = chain_of_path(surface, &path)?;
            Ok((
                path_weight(surface, &path)?,
                harmonic_projection(basis, &chain)?,
            ))
        };
        match classify() {
            Ok((length, projection)) => {
                let key = SignatureKey::of(&projection.0);
                let entry = table.classes.entry(key).or_insert_with(|| ClassEntry {
                    shortest_length: length,
                    representative: path.clone(),
                    member_count: 0,
                    projection,
                    witness: path.clone(),
                });
                entry.member_count += 1;
                if length < entry.shortest_length {
                    entry.shortest_length = length;
                    entry.representative = path.clone();
                }
                if path.num_edges() > entry.witness.num_edges() {
                    entry.witness = path;
                }
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let space = BoundarySpace::new(surface)?;
    let chains: Vec<(&SignatureKey, ChainVector)> = table
        .classes
        .iter()
        .map(|(k, c)| Ok((k, chain_of_path(surface, &c.representative)?)))
        .collect::<Result<_>>()?;
    for (key, entry) in &table.classes {
        let diff = &chains.iter().find(|c| c.0 == key).unwrap().1
            - &chain_of_path(surface, &entry.witness)?;
        if !space.contains(&diff) {
            return Err(Error::OracleMismatch(format!(
                "members of class {key} are not homologous"
            )));
        }
    }
    for (i, (ka, a)) in chains.iter().enumerate() {
        for (kb, b) in &chains[i + 1..] {
            if space.contains(&(a - b)) {
                return Err(Error::OracleMismatch(format!(
                    "classes {ka} and {kb} are homologous"
                )));
            }
        }
    }
    Ok(table)
}
