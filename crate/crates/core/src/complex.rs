//! Oriented 2-D simplicial surfaces and their boundary operators.
//!
//! Simplices are stored in canonical orientation (vertex indices increasing)
//! and ordered lexicographically by their vertex tuples, so matrix layouts are
//! reproducible for identical inputs.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|c| c.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    /// Membership in the open rectangle.
    pub fn contains_open(&self, p: Point) -> bool {
        p[0] > self.x_min && p[0] < self.x_max && p[1] > self.y_min && p[1] < self.y_max
    }

    pub fn strictly_inside(&self, outer: &Rect) -> bool {
        self.x_min > outer.x_min
            && self.x_max < outer.x_max
            && self.y_min > outer.y_min
            && self.y_max < outer.y_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedEdge {
    pub tail: VertexId,
    pub head: VertexId,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedTriangle {
    pub vertices: [VertexId; 3],
}

/// One entry of a vertex's adjacency list.
///
/// `sign` is `+1.0` when stepping from the owning vertex to `vertex` follows
/// the canonical orientation of `edge`, `-1.0` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: VertexId,
    pub edge: usize,
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub struct SimplicialSurface {
    positions: Vec<Point>,
    edges: Vec<OrientedEdge>,
    triangles: Vec<OrientedTriangle>,
    adjacency: Vec<Vec<Neighbor>>,
    edge_faces: Vec<u8>,
}

impl SimplicialSurface {
    /// Builds and validates a surface.
    ///
    /// Edges and triangles may be given in any vertex order; they are stored
    /// canonically. The result must be a connected 2-manifold with boundary:
    /// every edge lies in one or two triangles and every boundary vertex
    /// touches exactly two boundary edges.
    pub fn new(
        positions: Vec<Point>,
        edges: Vec<([usize; 2], f64)>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::InvalidSurface("no vertices".into()));
        }
        if let Some(i) = positions
            .iter()
            .position(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::InvalidSurface(format!(
                "vertex {i} has a non-finite position"
            )));
        }

        let mut canon = Vec::with_capacity(edges.len());
        for ([a, b], w) in edges {
            if a >= n || b >= n {
                return Err(Error::UnknownVertex(VertexId(a.max(b))));
            }
            if a == b {
                return Err(Error::InvalidSurface(format!("self-loop at vertex {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidSurface(format!(
                    "edge ({a}, {b}) has weight {w}"
                )));
            }
            canon.push(OrientedEdge {
                tail: VertexId(a.min(b)),
                head: VertexId(a.max(b)),
                weight: w,
            });
        }
        canon.sort_by_key(|e| (e.tail, e.head));
        if let Some(pair) = canon
            .windows(2)
            .find(|p| (p[0].tail, p[0].head) == (p[1].tail, p[1].head))
        {
            return Err(Error::InvalidSurface(format!(
                "duplicate edge ({}, {})",
                pair[0].tail.0, pair[0].head.0
            )));
        }

        let mut adjacency = vec![Vec::new(); n];
        for (e, edge) in canon.iter().enumerate() {
            adjacency[edge.tail.0].push(Neighbor {
                vertex: edge.head,
                edge: e,
                sign: 1.0,
            });
            adjacency[edge.head.0].push(Neighbor {
                vertex: edge.tail,
                edge: e,
                sign: -1.0,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|nb| nb.vertex);
        }

        let mut tris = Vec::with_capacity(triangles.len());
        for mut t in triangles {
            t.sort_unstable();
            if t[2] >= n {
                return Err(Error::UnknownVertex(VertexId(t[2])));
            }
            if t[0] == t[1] || t[1] == t[2] {
                return Err(Error::InvalidSurface(format!("degenerate triangle {t:?}")));
            }
            tris.push(OrientedTriangle {
                vertices: t.map(VertexId),
            });
        }
        tris.sort_by_key(|t| t.vertices);
        if tris.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidSurface("duplicate triangle".into()));
        }

        let mut surface = Self {
            positions,
            edges: canon,
            triangles: tris,
            adjacency,
            edge_faces: Vec::new(),
        };

        let mut faces = vec![0u8; surface.edges.len()];
        for t in &surface.triangles {
            for e in surface.triangle_edges(t)? {
                faces[e] += 1;
                if faces[e] > 2 {
                    let edge = surface.edges[e];
                    return Err(Error::NonManifold(format!(
                        "edge ({}, {}) is shared by more than two triangles",
                        edge.tail.0, edge.head.0
                    )));
                }
            }
        }
        if let Some(e) = faces.iter().position(|&c| c == 0) {
            let edge = surface.edges[e];
            return Err(Error::NonManifold(format!(
                "edge ({}, {}) has no incident triangle",
                edge.tail.0, edge.head.0
            )));
        }
        surface.edge_faces = faces;

        for (v, list) in surface.adjacency.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::InvalidSurface(format!("vertex {v} is isolated")));
            }
            let boundary = list
                .iter()
                .filter(|nb| surface.edge_faces[nb.edge] == 1)
                .count();
            if boundary != 0 && boundary != 2 {
                return Err(Error::NonManifold(format!(
                    "vertex {v} touches {boundary} boundary edges"
                )));
            }
        }

        let components = surface.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(surface)
    }

    fn triangle_edges(&self, t: &OrientedTriangle) -> Result<[usize; 3]> {
        let [a, b, c] = t.vertices;
        let find = |u: VertexId, v: VertexId| {
            self.edge_between(u, v)
                .map(|nb| nb.edge)
                .ok_or(Error::MissingEdge(u, v))
        };
        // Order matches the faces [b,c], [a,c], [a,b] of the alternating sum.
        Ok([find(b, c)?, find(a, c)?, find(a, b)?])
    }

    fn component_count(&self) -> usize {
        let n = self.positions.len();
        let mut seen = vec![false; n];
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for nb in &self.adjacency[v] {
                    if !seen[nb.vertex.0] {
                        seen[nb.vertex.0] = true;
                        queue.push_back(nb.vertex.0);
                    }
                }
            }
        }
        components
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> {
        (0..self.positions.len()).map(VertexId)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.0 < self.positions.len()
    }

    pub fn position(&self, v: VertexId) -> Point {
        self.positions[v.0]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn triangles(&self) -> &[OrientedTriangle] {
        &self.triangles
    }

    /// Neighbors of `v`, sorted by vertex index.
    pub fn neighbors(&self, v: VertexId) -> &[Neighbor] {
        &self.adjacency[v.0]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<Neighbor> {
        let list = self.adjacency.get(u.0)?;
        list.binary_search_by_key(&v, |nb| nb.vertex)
            .ok()
            .map(|i| list[i])
    }

    /// Number of triangles incident to edge `e` (1 on the boundary, 2 inside).
    pub fn edge_face_count(&self, e: usize) -> usize {
        self.edge_faces[e] as usize
    }

    /// Vertex at `p`, matched to within `1e-9` per coordinate.
    pub fn find_vertex(&self, p: Point) -> Option<VertexId> {
        self.positions
            .iter()
            .position(|q| (q[0] - p[0]).abs() <= 1e-9 && (q[1] - p[1]).abs() <= 1e-9)
            .map(VertexId)
    }

    /// Closed boundary cycles, each oriented counter-clockwise and listed
    /// without repeating its first vertex. Cycles are ordered by their
    /// smallest vertex index.
    pub fn boundary_loops(&self) -> Vec<Vec<VertexId>> {
        let mut used = vec![false; self.edges.len()];
        let mut loops = Vec::new();
        for start in 0..self.edges.len() {
            if used[start] || self.edge_faces[start] != 1 {
                continue;
            }
            used[start] = true;
            let first = self.edges[start].tail;
            let mut cycle = vec![first];
            let mut current = self.edges[start].head;
            while current != first {
                cycle.push(current);
                let next = self.adjacency[current.0]
                    .iter()
                    .find(|nb| self.edge_faces[nb.edge] == 1 && !used[nb.edge])
                    .copied();
                match next {
                    Some(nb) => {
                        used[nb.edge] = true;
                        current = nb.vertex;
                    }
                    None => break,
                }
            }
            if self.signed_area(&cycle) < 0.0 {
                cycle[1..].reverse();
            }
            loops.push(cycle);
        }
        loops.sort_by_key(|c| c.iter().min().copied());
        loops
    }

    /// Boundary cycles of the holes, i.e. every boundary cycle except the one
    /// enclosing the largest area.
    pub fn hole_loops(&self) -> Vec<Vec<VertexId>> {
        let mut loops = self.boundary_loops();
        if let Some(outer) = loops
            .iter()
            .enumerate()
            .max_by(|a, b| self.signed_area(a.1).total_cmp(&self.signed_area(b.1)))
            .map(|(i, _)| i)
        {
            loops.remove(outer);
        }
        loops
    }

    pub fn hole_count(&self) -> usize {
        self.boundary_loops().len().saturating_sub(1)
    }

    fn signed_area(&self, cycle: &[VertexId]) -> f64 {
        let mut area = 0.0;
        for (i, v) in cycle.iter().enumerate() {
            let p = self.positions[v.0];
            let q = self.positions[cycle[(i + 1) % cycle.len()].0];
            area += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * area
    }

    pub fn to_data(&self) -> SurfaceData {
        SurfaceData {
            vertices: self.positions.clone(),
            edges: self.edges.iter().map(|e| [e.tail.0, e.head.0]).collect(),
            weights: self.edges.iter().map(|e| e.weight).collect(),
            triangles: self
                .triangles
                .iter()
                .map(|t| t.vertices.map(|v| v.0))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_data())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: SurfaceData = serde_json::from_str(text)?;
        Self::try_from(data)
    }
}

/// JSON form of a surface: vertex positions, canonical edge index pairs with
/// a parallel weight array, and triangle index triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceData {
    pub vertices: Vec<Point>,
    pub edges: Vec<[usize; 2]>,
    pub weights: Vec<f64>,
    pub triangles: Vec<[usize; 3]>,
}

impl TryFrom<SurfaceData> for SimplicialSurface {
    type Error = Error;

    fn try_from(data: SurfaceData) -> Result<Self> {
        if data.edges.len() != data.weights.len() {
            return Err(Error::InvalidSurface(format!(
                "{} edges but {} weights",
                data.edges.len(),
                data.weights.len()
            )));
        }
        let edges = data.edges.into_iter().zip(data.weights).collect();
        SimplicialSurface::new(data.vertices, edges, data.triangles)
    }
}

/// Uniform grid of `rows x cols` points spanning `bounds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub bounds: Rect,
}

impl GridSpec {
    pub fn position(&self, col: usize, row: usize) -> Point {
        let b = &self.bounds;
        let dx = (b.x_max - b.x_min) / (self.cols - 1) as f64;
        let dy = (b.y_max - b.y_min) / (self.rows - 1) as f64;
        [b.x_min + col as f64 * dx, b.y_min + row as f64 * dy]
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2x2 points, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.bounds.is_valid() {
            return Err(Error::InvalidGrid(
                "bounds must be a finite, non-empty rectangle".into(),
            ));
        }
        Ok(())
    }
}

/// Triangulates a uniform grid and cuts rectangular holes out of it.
///
/// Every cell is split along its lower-left to upper-right diagonal. A
/// triangle is removed when its centroid lies in the open interior of a
/// hole. An edge is removed when all of its triangles were removed and its
/// midpoint lies in a hole; vertices left without edges are dropped and the
/// survivors renumbered in grid order (row-major, bottom row first).
pub fn build_grid_complex(grid: &GridSpec, holes: &[Rect]) -> Result<SimplicialSurface> {
    grid.validate()?;
    for (index, hole) in holes.iter().enumerate() {
        if !hole.is_valid() || !hole.strictly_inside(&grid.bounds) {
            return Err(Error::HoleOutsideBounds { index });
        }
    }

    let id = |col: usize, row: usize| row * grid.cols + col;
    let positions: Vec<Point> = (0..grid.rows)
        .flat_map(|row| (0..grid.cols).map(move |col| (col, row)))
        .map(|(col, row)| grid.position(col, row))
        .collect();
    let in_hole = |p: Point| holes.iter().position(|h| h.contains_open(p));

    let mut triangles = Vec::new();
    for row in 0..grid.rows - 1 {
        for col in 0..grid.cols - 1 {
            let (a, b) = (id(col, row), id(col + 1, row));
            let (d, e) = (id(col, row + 1), id(col + 1, row + 1));
            triangles.push([a, b, e]);
            triangles.push([a, d, e]);
        }
    }

    let mut cutting = vec![false; holes.len()];
    let mut kept_triangles = Vec::new();
    // edge -> (incident triangles, removed incident triangles)
    let mut edge_use: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for t in &triangles {
        let centroid = [
            (positions[t[0]][0] + positions[t[1]][0] + positions[t[2]][0]) / 3.0,
            (positions[t[0]][1] + positions[t[1]][1] + positions[t[2]][1]) / 3.0,
        ];
        let removed = match in_hole(centroid) {
            Some(h) => {
                cutting[h] = true;
                true
            }
            None => {
                kept_triangles.push(*t);
                false
            }
        };
        for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
            let entry = edge_use.entry((u.min(v), u.max(v))).or_default();
            entry.0 += 1;
            entry.1 += removed as usize;
        }
    }

    let kept_edges: Vec<(usize, usize)> = edge_use
        .into_iter()
        .filter(|&((u, v), (total, removed))| {
            let mid = [
                0.5 * (positions[u][0] + positions[v][0]),
                0.5 * (positions[u][1] + positions[v][1]),
            ];
            !(removed == total && in_hole(mid).is_some())
        })
        .map(|(e, _)| e)
        .collect();

    let mut used = vec![false; positions.len()];
    for &(u, v) in &kept_edges {
        used[u] = true;
        used[v] = true;
    }
    let mut remap = vec![usize::MAX; positions.len()];
    let mut new_positions = Vec::new();
    for (old, &keep) in used.iter().enumerate() {
        if keep {
            remap[old] = new_positions.len();
            new_positions.push(positions[old]);
        }
    }
    let edges = kept_edges
        .iter()
        .map(|&(u, v)| {
            let (p, q) = (positions[u], positions[v]);
            ([remap[u], remap[v]], (p[0] - q[0]).hypot(p[1] - q[1]))
        })
        .collect();
    let triangles = kept_triangles.iter().map(|t| t.map(|v| remap[v])).collect();

    let surface = SimplicialSurface::new(new_positions, edges, triangles)?;
    let expected = cutting.iter().filter(|&&c| c).count();
    let found = surface.hole_count();
    if found != expected {
        return Err(Error::HoleTopology { expected, found });
    }
    Ok(surface)
}

/// Sparse matrix of a boundary operator with entries in {-1, 0, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix {
    rows: usize,
    columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// Nonzero entries of column `j`, sorted by row.
    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.columns[j]
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.columns[j]
            .iter()
            .find(|&&(r, _)| r == i)
            .map_or(0, |&(_, s)| s)
    }

    /// `self * x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(
            x.len(),
            self.cols(),
            "boundary matrix applied to wrong dimension"
        );
        let mut y = vec![0.0; self.rows];
        for (col, &xj) in self.columns.iter().zip(x) {
            for &(i, s) in col {
                y[i] += f64::from(s) * xj;
            }
        }
        y
    }

    /// `selfᵀ * y`
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(
            y.len(),
            self.rows,
            "boundary matrix transpose applied to wrong dimension"
        );
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(i, s)| f64::from(s) * y[i]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, s) in col {
                m[(i, j)] = f64::from(s);
            }
        }
        m
    }

    /// Nonzero entries `(row, col, value)` of the exact integer product
    /// `self * rhs`.
    pub fn compose(&self, rhs: &BoundaryMatrix) -> Vec<(usize, usize, i64)> {
        assert_eq!(self.cols(), rhs.rows, "incompatible boundary matrices");
        let mut out = Vec::new();
        for (j, rcol) in rhs.columns.iter().enumerate() {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for &(k, s) in rcol {
                for &(i, t) in &self.columns[k] {
                    *acc.entry(i).or_default() += i64::from(s) * i64::from(t);
                }
            }
            out.extend(
                acc.into_iter()
                    .filter(|&(_, v)| v != 0)
                    .map(|(i, v)| (i, j, v)),
            );
        }
        out
    }
}

/// Matrix of the boundary operator `∂k` (k = 1 or 2) in the canonical
/// simplex bases.
pub fn boundary_matrix(surface: &SimplicialSurface, k: usize) -> Result<BoundaryMatrix> {
    match k {
        1 => Ok(BoundaryMatrix {
            rows: surface.num_vertices(),
            columns: surface
                .edges
                .iter()
                .map(|e| vec![(e.tail.0, -1), (e.head.0, 1)])
                .collect(),
        }),
        2 => {
            let mut columns = Vec::with_capacity(surface.num_triangles());
            for t in &surface.triangles {
                let [bc, ac, ab] = surface.triangle_edges(t)?;
                let mut col = vec![(bc, 1), (ac, -1), (ab, 1)];
                col.sort_unstable();
                columns.push(col);
            }
            Ok(BoundaryMatrix {
                rows: surface.num_edges(),
                columns,
            })
        }
        other => Err(Error::InvalidBoundaryIndex(other)),
    }
}

pub fn euler_characteristic(surface: &SimplicialSurface) -> i64 {
    surface.num_vertices() as i64 - surface.num_edges() as i64 + surface.num_triangles() as i64
}
