#![allow(dead_code)]

use hstar_core::complex::{build_grid_complex, GridSpec, Rect, SimplicialSurface, VertexId};
use hstar_core::path::Path;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grid on `[0, n-1]²` plus integer-aligned holes that keep one grid unit
/// from the border and from each other.
#[derive(Debug, Clone)]
pub struct Layout {
    pub n: usize,
    pub holes: Vec<[usize; 4]>,
}

impl Layout {
    pub fn grid(&self) -> GridSpec {
        let side = (self.n - 1) as f64;
        GridSpec {
            rows: self.n,
            cols: self.n,
            bounds: Rect::new(0.0, 0.0, side, side),
        }
    }

    pub fn rects(&self) -> Vec<Rect> {
        self.holes
            .iter()
            .map(|&[x0, y0, x1, y1]| Rect::new(x0 as f64, y0 as f64, x1 as f64, y1 as f64))
            .collect()
    }

    pub fn surface(&self) -> SimplicialSurface {
        build_grid_complex(&self.grid(), &self.rects()).expect("layout is valid by construction")
    }
}

fn separated(a: &[usize; 4], b: &[usize; 4]) -> bool {
    a[2] < b[0] || b[2] < a[0] || a[3] < b[1] || b[3] < a[1]
}

/// Greedily keeps the candidates that fit.
pub fn place(n: usize, candidates: &[(usize, usize, usize, usize)]) -> Layout {
    let mut holes: Vec<[usize; 4]> = Vec::new();
    for &(x, y, w, h) in candidates {
        let rect = [1 + x % (n - 2), 1 + y % (n - 2), 0, 0];
        let rect = [rect[0], rect[1], rect[0] + 1 + w, rect[1] + 1 + h];
        if rect[2] > n - 2 || rect[3] > n - 2 {
            continue;
        }
        if holes.iter().all(|h| separated(h, &rect)) {
            holes.push(rect);
        }
    }
    Layout { n, holes }
}

pub fn layout_strategy(
    min_n: usize,
    max_n: usize,
    max_holes: usize,
) -> impl Strategy<Value = Layout> {
    (
        min_n..=max_n,
        prop::collection::vec(
            (0usize..64, 0usize..64, 0usize..3, 0usize..3),
            0..=max_holes,
        ),
    )
        .prop_map(|(n, candidates)| place(n, &candidates))
}

/// Random walk of `steps` edges from a seed-chosen vertex.
pub fn random_walk(surface: &SimplicialSurface, seed: u64, steps: usize) -> Path {
    let start = VertexId(seed as usize % surface.num_vertices());
    random_walk_from(surface, start, seed, steps)
}

/// Random walk of `steps` edges from `start`.
pub fn random_walk_from(
    surface: &SimplicialSurface,
    start: VertexId,
    seed: u64,
    steps: usize,
) -> Path {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = start;
    let mut nodes = vec![v];
    for _ in 0..steps {
        let nbrs = surface.neighbors(v);
        v = nbrs[rng.gen_range(0..nbrs.len())].vertex;
        nodes.push(v);
    }
    Path::new(nodes).unwrap()
}
