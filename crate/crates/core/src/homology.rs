//! Hodge 1-Laplacian, harmonic bases and harmonic projections of paths.
//!
//! The harmonic projection `Hᵀ Φ(τ)` of a path is a homology invariant: two
//! co-terminal paths are homologous exactly when their projections agree.

use std::ops::{Add, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::complex::{boundary_matrix, SimplicialSurface};
use crate::error::{Error, Result};
use crate::path::Path;

/// Relative eigenvalue threshold below which an eigenvector of `L1` is
/// treated as harmonic.
pub const DEFAULT_NULL_TOLERANCE: f64 = 1e-9;

/// Default tolerance on the projection difference for [`are_homologous`].
pub const DEFAULT_HOMOLOGY_TOLERANCE: f64 = 1e-6;

/// Required ratio between the first nonzero eigenvalue and the kernel.
pub const SPECTRAL_GAP_RATIO: f64 = 1e3;

/// Surfaces with more edges than this are rejected by the dense solver.
pub const MAX_DENSE_EDGES: usize = 5000;

/// Real 1-chain, indexed by canonical edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainVector(pub Vec<f64>);

impl ChainVector {
    pub fn zeros(edges: usize) -> Self {
        Self(vec![0.0; edges])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl Add for &ChainVector {
    type Output = ChainVector;

    fn add(self, rhs: &ChainVector) -> ChainVector {
        assert_eq!(self.len(), rhs.len());
        ChainVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ChainVector {
    type Output = ChainVector;

    fn sub(self, rhs: &ChainVector) -> ChainVector {
        assert_eq!(self.len(), rhs.len());
        ChainVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &ChainVector {
    type Output = ChainVector;

    fn neg(self) -> ChainVector {
        ChainVector(self.0.iter().map(|c| -c).collect())
    }
}

/// Harmonic projection of a chain, one coordinate per basis column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Projection(pub Vec<f64>);

impl Projection {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Compressed sparse row matrix; used for the (symmetric) Hodge Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles an `n x n` matrix from triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::new();
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                rows.push(i);
                last = Some((i, j));
            }
        }
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((i, j), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != 0.0 {
                row_ptr[i + 1] += 1;
                keep_cols.push(j);
                keep_vals.push(v);
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx: keep_cols,
            values: keep_vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// `L1 = ∂1ᵀ∂1 + ∂2∂2ᵀ`, unweighted.
pub fn hodge_laplacian_1(surface: &SimplicialSurface) -> CsrMatrix {
    let d1 = boundary_matrix(surface, 1).expect("k = 1 is valid");
    let d2 = boundary_matrix(surface, 2).expect("k = 2 is valid");
    let mut triplets = Vec::new();

    // ∂1ᵀ∂1: edges sharing a vertex.
    let mut incident: Vec<Vec<(usize, i8)>> = vec![Vec::new(); d1.rows()];
    for e in 0..d1.cols() {
        for &(v, s) in d1.column(e) {
            incident[v].push((e, s));
        }
    }
    for list in &incident {
        for &(a, sa) in list {
            for &(b, sb) in list {
                triplets.push((a, b, f64::from(sa * sb)));
            }
        }
    }
    // ∂2∂2ᵀ: edges sharing a triangle.
    for t in 0..d2.cols() {
        let col = d2.column(t);
        for &(a, sa) in col {
            for &(b, sb) in col {
                triplets.push((a, b, f64::from(sa * sb)));
            }
        }
    }
    CsrMatrix::from_triplets(surface.num_edges(), triplets)
}

/// Orthonormal basis `H` of `ker(L1)`, stored row-major so that row `e` is
/// the harmonic value `Hᵀ e` of edge `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicBasis {
    edges: usize,
    dim: usize,
    null_tolerance: f64,
    rows: Vec<f64>,
}

impl HarmonicBasis {
    /// Wraps an explicit `|E| x D` matrix, checking orthonormality.
    pub fn from_columns(columns: &DMatrix<f64>, null_tolerance: f64) -> Result<Self> {
        let (edges, dim) = columns.shape();
        if !(null_tolerance.is_finite() && null_tolerance > 0.0) {
            return Err(Error::InvalidBasis(format!(
                "null tolerance {null_tolerance}"
            )));
        }
        if columns.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBasis("non-finite entry".into()));
        }
        let gram = columns.transpose() * columns;
        let err = (gram - DMatrix::<f64>::identity(dim, dim)).amax();
        if err > 1e-8 {
            return Err(Error::InvalidBasis(format!(
                "columns are not orthonormal (error {err:.2e})"
            )));
        }
        let mut rows = Vec::with_capacity(edges * dim);
        for e in 0..edges {
            rows.extend(columns.row(e).iter());
        }
        Ok(Self {
            edges,
            dim,
            null_tolerance,
            rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_edges(&self) -> usize {
        self.edges
    }

    pub fn null_tolerance(&self) -> f64 {
        self.null_tolerance
    }

    /// Harmonic value of the canonically oriented edge `e` (row `e` of `H`).
    #[inline]
    pub fn edge_values(&self, e: usize) -> &[f64] {
        &self.rows[e * self.dim..(e + 1) * self.dim]
    }

    pub fn columns(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.edges, self.dim, &self.rows)
    }

    /// The basis `H Q` for an orthogonal `D x D` matrix `Q`; spans the same
    /// kernel.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Self> {
        if rotation.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rotation.nrows(),
            });
        }
        Self::from_columns(&(self.columns() * rotation), self.null_tolerance)
    }

    pub fn to_data(&self) -> BasisData {
        BasisData {
            rows: self.edges,
            dim: self.dim,
            null_tolerance: self.null_tolerance,
            columns: self.columns().as_slice().to_vec(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_data())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: BasisData = serde_json::from_str(text)?;
        Self::try_from(data)
    }
}

/// JSON form of a basis: `columns` holds the `rows x dim` matrix in
/// column-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisData {
    pub rows: usize,
    pub dim: usize,
    pub null_tolerance: f64,
    pub columns: Vec<f64>,
}

impl TryFrom<BasisData> for HarmonicBasis {
    type Error = Error;

    fn try_from(data: BasisData) -> Result<Self> {
        if data.columns.len() != data.rows * data.dim {
            return Err(Error::DimensionMismatch {
                expected: data.rows * data.dim,
                found: data.columns.len(),
            });
        }
        let m = DMatrix::from_column_slice(data.rows, data.dim, &data.columns);
        HarmonicBasis::from_columns(&m, data.null_tolerance)
    }
}

/// Orthonormal basis of the numerical kernel of a symmetric PSD matrix.
///
/// Eigenvalues below `null_tolerance * λ_max` form the kernel. The first
/// eigenvalue above the cut must exceed the kernel by [`SPECTRAL_GAP_RATIO`].
pub fn harmonic_basis(laplacian: &CsrMatrix, null_tolerance: f64) -> Result<HarmonicBasis> {
    let n = laplacian.dim();
    if n > MAX_DENSE_EDGES {
        return Err(Error::InvalidBasis(format!(
            "{n} edges exceed the dense solver limit of {MAX_DENSE_EDGES}"
        )));
    }
    if !(null_tolerance.is_finite() && null_tolerance > 0.0) {
        return Err(Error::InvalidBasis(format!(
            "null tolerance {null_tolerance}"
        )));
    }
    if n == 0 {
        return HarmonicBasis::from_columns(&DMatrix::zeros(0, 0), null_tolerance);
    }

    let eigen = SymmetricEigen::new(laplacian.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let largest = eigen.eigenvalues[order[n - 1]].max(0.0);
    let cut = null_tolerance * largest;

    let dim = order
        .iter()
        .take_while(|&&i| eigen.eigenvalues[i] < cut)
        .count();
    if dim < n {
        let kernel = order[..dim]
            .iter()
            .map(|&i| eigen.eigenvalues[i].abs())
            .fold(cut, f64::max);
        let first = eigen.eigenvalues[order[dim]];
        let ratio = if kernel > 0.0 {
            first / kernel
        } else {
            f64::INFINITY
        };
        if ratio < SPECTRAL_GAP_RATIO {
            return Err(Error::SpectralGap { ratio });
        }
    }

    let mut columns = DMatrix::zeros(n, dim);
    for (k, &i) in order[..dim].iter().enumerate() {
        let mut v = eigen.eigenvectors.column(i).into_owned();
        // Fix the sign so the first entry of largest magnitude is positive.
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        columns.set_column(k, &v);
    }
    HarmonicBasis::from_columns(&columns, null_tolerance)
}

/// Laplacian assembly plus kernel extraction with the default tolerance.
pub fn surface_harmonic_basis(surface: &SimplicialSurface) -> Result<HarmonicBasis> {
    harmonic_basis(&hodge_laplacian_1(surface), DEFAULT_NULL_TOLERANCE)
}

/// `Φ(τ)`: signed sum of the edges traversed by the path.
pub fn chain_of_path(surface: &SimplicialSurface, path: &Path) -> Result<ChainVector> {
    let mut chain = ChainVector::zeros(surface.num_edges());
    for pair in path.nodes().windows(2) {
        let nb = surface
            .edge_between(pair[0], pair[1])
            .ok_or(Error::MissingEdge(pair[0], pair[1]))?;
        chain.0[nb.edge] += nb.sign;
    }
    if path.nodes().len() == 1 && !surface.contains(path.source()) {
        return Err(Error::UnknownVertex(path.source()));
    }
    Ok(chain)
}

/// `Hᵀ x`
pub fn harmonic_projection(basis: &HarmonicBasis, chain: &ChainVector) -> Result<Projection> {
    if chain.len() != basis.num_edges() {
        return Err(Error::DimensionMismatch {
            expected: basis.num_edges(),
            found: chain.len(),
        });
    }
    let mut out = vec![0.0; basis.dim()];
    for (e, &c) in chain.0.iter().enumerate() {
        if c != 0.0 {
            for (o, h) in out.iter_mut().zip(basis.edge_values(e)) {
                *o += c * h;
            }
        }
    }
    Ok(Projection(out))
}

/// Projection of a path accumulated edge by edge in path order, the same
/// order the searches use, without materialising the chain.
pub fn path_projection(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    path: &Path,
) -> Result<Projection> {
    let mut out = vec![0.0; basis.dim()];
    for pair in path.nodes().windows(2) {
        let nb = surface
            .edge_between(pair[0], pair[1])
            .ok_or(Error::MissingEdge(pair[0], pair[1]))?;
        for (o, h) in out.iter_mut().zip(basis.edge_values(nb.edge)) {
            *o += nb.sign * h;
        }
    }
    Ok(Projection(out))
}

/// Euclidean distance between two projections.
pub fn projection_difference(a: &Projection, b: &Projection) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(distance(&a.0, &b.0))
}

#[inline]
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Whether two co-terminal paths are homologous, decided by the distance of
/// their harmonic projections.
pub fn are_homologous(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
    p1: &Path,
    p2: &Path,
    tol: f64,
) -> Result<bool> {
    if p1.source() != p2.source() || p1.dest() != p2.dest() {
        return Err(Error::EndpointMismatch(
            p1.source(),
            p1.dest(),
            p2.source(),
            p2.dest(),
        ));
    }
    let a = path_projection(surface, basis, p1)?;
    let b = path_projection(surface, basis, p2)?;
    Ok(projection_difference(&a, &b)? <= tol)
}

/// Projection of each hole's counter-clockwise boundary cycle, in the order
/// of [`SimplicialSurface::hole_loops`].
pub fn hole_loop_values(
    surface: &SimplicialSurface,
    basis: &HarmonicBasis,
) -> Result<Vec<Projection>> {
    surface
        .hole_loops()
        .into_iter()
        .map(|mut cycle| {
            cycle.push(cycle[0]);
            path_projection(surface, basis, &Path::new(cycle)?)
        })
        .collect()
}
