use thiserror::Error;

use crate::complex::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("hole {index} does not lie strictly inside the grid bounds")]
    HoleOutsideBounds { index: usize },
    #[error("hole layout produced {found} holes in the surface, expected {expected}")]
    HoleTopology { expected: usize, found: usize },
    #[error("surface is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("surface is not a manifold: {0}")]
    NonManifold(String),
    #[error("boundary operator index k = {0} is not supported (expected 1 or 2)")]
    InvalidBoundaryIndex(usize),

    #[error("laplacian has no clear spectral gap (ratio {ratio:.3e} < 1e3)")]
    SpectralGap { ratio: f64 },
    #[error("invalid harmonic basis: {0}")]
    InvalidBasis(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("path is empty")]
    EmptyPath,
    #[error("vertex {0} does not exist")]
    UnknownVertex(VertexId),
    #[error("no edge between {0} and {1}")]
    MissingEdge(VertexId, VertexId),
    #[error("cannot join paths: {left} != {right}")]
    JunctionMismatch { left: VertexId, right: VertexId },
    #[error("path endpoints differ: ({0}, {1}) vs ({2}, {3})")]
    EndpointMismatch(VertexId, VertexId, VertexId, VertexId),
    #[error("{0} is unreachable from {1}")]
    Unreachable(VertexId, VertexId),
    #[error("invalid search input: {0}")]
    InvalidSearch(String),

    #[error("target homology class is unreachable within the winding bound")]
    SignatureBoundExhausted,
    #[error("class {key} is shorter than the target but has zero projection difference")]
    HomologyBookkeeping { key: String },

    #[error("oracle size guard: {0}")]
    SizeGuard(String),
    #[error("oracle classification disagrees with the boundary residual test: {0}")]
    OracleMismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
