//! Small reference surfaces, small enough for exhaustive path enumeration.

use crate::complex::{build_grid_complex, GridSpec, Rect, SimplicialSurface, VertexId};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub grid: GridSpec,
    pub holes: Vec<Rect>,
    pub surface: SimplicialSurface,
    pub source: VertexId,
    pub dest: VertexId,
}

impl Fixture {
    /// Builds the grid surface and resolves `source`/`dest` given as
    /// `[col, row]`.
    pub fn build(
        grid: GridSpec,
        holes: Vec<Rect>,
        source: [usize; 2],
        dest: [usize; 2],
    ) -> Result<Self> {
        let surface = build_grid_complex(&grid, &holes)?;
        let locate = |[col, row]: [usize; 2]| {
            surface.find_vertex(grid.position(col, row)).ok_or_else(|| {
                Error::InvalidGrid(format!("grid point [{col}, {row}] is not on the surface"))
            })
        };
        let source = locate(source)?;
        let dest = locate(dest)?;
        Ok(Self {
            grid,
            holes,
            surface,
            source,
            dest,
        })
    }

    /// Vertex at grid coordinate `[col, row]`.
    pub fn at(&self, col: usize, row: usize) -> Option<VertexId> {
        self.surface.find_vertex(self.grid.position(col, row))
    }
}

fn unit_grid(cols: usize, rows: usize) -> GridSpec {
    GridSpec {
        rows,
        cols,
        bounds: Rect::new(0.0, 0.0, (cols - 1) as f64, (rows - 1) as f64),
    }
}

/// 4×4 grid with the centre cell removed; source at the lower-left corner,
/// destination on the right edge one row below the top. The two classes
/// have different shortest lengths.
pub fn tiny_annulus() -> Result<Fixture> {
    Fixture::build(
        unit_grid(4, 4),
        vec![Rect::new(1.0, 1.0, 2.0, 2.0)],
        [0, 0],
        [3, 2],
    )
}

/// 6×4 grid with two unit-cell holes side by side; corner to corner.
pub fn two_hole() -> Result<Fixture> {
    Fixture::build(
        unit_grid(6, 4),
        vec![Rect::new(1.0, 1.0, 2.0, 2.0), Rect::new(3.0, 1.0, 4.0, 2.0)],
        [0, 0],
        [5, 3],
    )
}

/// `n×n` grid without holes; corner to corner.
pub fn disk(n: usize) -> Result<Fixture> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!(
            "disk needs at least 2 points per side, got {n}"
        )));
    }
    Fixture::build(unit_grid(n, n), Vec::new(), [0, 0], [n - 1, n - 1])
}
