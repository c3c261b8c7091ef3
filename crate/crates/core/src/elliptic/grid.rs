use std::collections::VecDeque;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::geometry::{point_in_polygon, BoxRegion, DomainSpec, Piece, Point};
use crate::{Error, Outcome, Result, Warning};

/// Classification of a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Fluid,
    /// Outside the outer boundary, outside the box, or on the grid border.
    Outer,
    Obstacle(usize),
}

/// Uniform cell-centred grid over a box with node classification.
///
/// Node `(i, j)` sits at `(x0 + (i + ½)h, y0 + (j + ½)h)`; the border ring is
/// always `Outer` so every fluid node has four neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedGrid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nodes: Vec<Node>,
    pub obstacles: usize,
    pub bounded: bool,
}

/// Nodal values on a grid (zero on solid nodes for homogeneous Dirichlet data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(g: &MaskedGrid) -> Self {
        ScalarField { nx: g.nx, ny: g.ny, data: vec![0.0; g.len()] }
    }

    pub fn from_vec(g: &MaskedGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != g.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField { nx: g.nx, ny: g.ny, data })
    }

    pub fn matches(&self, g: &MaskedGrid) -> bool {
        self.nx == g.nx && self.ny == g.ny && self.data.len() == g.len()
    }

    pub fn same_shape(&self, o: &ScalarField) -> bool {
        self.nx == o.nx && self.ny == o.ny
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn axpy(&mut self, a: f64, x: &ScalarField) {
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += a * v;
        }
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.data[k]
    }
}

impl IndexMut<usize> for ScalarField {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.data[k]
    }
}

impl MaskedGrid {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> Point {
        Point::new(self.x0 + (i as f64 + 0.5) * self.h, self.y0 + (j as f64 + 0.5) * self.h)
    }

    #[inline]
    pub fn pos_of(&self, k: usize) -> Point {
        let (i, j) = self.ij(k);
        self.pos(i, j)
    }

    #[inline]
    pub fn is_fluid(&self, k: usize) -> bool {
        self.nodes[k] == Node::Fluid
    }

    pub fn fluid_count(&self) -> usize {
        self.nodes.iter().filter(|n| **n == Node::Fluid).count()
    }

    pub fn obstacle_mask(&self, i: usize) -> Vec<bool> {
        self.nodes.iter().map(|n| *n == Node::Obstacle(i)).collect()
    }

    /// Box covered by the cells.
    pub fn extent(&self) -> BoxRegion {
        BoxRegion::new(
            Point::new(self.x0, self.y0),
            Point::new(self.x0 + self.nx as f64 * self.h, self.y0 + self.ny as f64 * self.h),
        )
    }

    /// Field of `f` evaluated at every node.
    pub fn sample(&self, f: impl Fn(Point) -> f64) -> ScalarField {
        let data = (0..self.len()).map(|k| f(self.pos_of(k))).collect();
        ScalarField { nx: self.nx, ny: self.ny, data }
    }

    /// Like [`sample`](Self::sample) but zero off the fluid nodes.
    pub fn sample_fluid(&self, f: impl Fn(Point) -> f64) -> ScalarField {
        let data = (0..self.len())
            .map(|k| if self.is_fluid(k) { f(self.pos_of(k)) } else { 0.0 })
            .collect();
        ScalarField { nx: self.nx, ny: self.ny, data }
    }

    /// Same shape and the same spacing and origin.
    pub fn same_lattice(&self, o: &MaskedGrid) -> bool {
        self.nx == o.nx && self.ny == o.ny && self.h == o.h && self.x0 == o.x0 && self.y0 == o.y0
    }

    /// Cell containing `p` (clamped to the grid).
    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        let i = ((p.x - self.x0) / self.h).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p.y - self.y0) / self.h).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    /// Calls `f(a, b)` for every horizontal then every vertical edge, in a fixed order.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize)) {
        for j in 0..self.ny {
            for i in 0..self.nx - 1 {
                let a = self.idx(i, j);
                f(a, a + 1);
            }
        }
        for j in 0..self.ny - 1 {
            for i in 0..self.nx {
                let a = self.idx(i, j);
                f(a, a + self.nx);
            }
        }
    }

    /// Connected components of the non-fluid nodes (8-connectivity).
    pub fn complement_components(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.len() {
            if seen[s] || self.is_fluid(s) {
                continue;
            }
            count += 1;
            seen[s] = true;
            queue.push_back(s);
            while let Some(k) = queue.pop_front() {
                let (i, j) = self.ij(k);
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
                            continue;
                        }
                        let m = self.idx(ni as usize, nj as usize);
                        if !seen[m] && !self.is_fluid(m) {
                            seen[m] = true;
                            queue.push_back(m);
                        }
                    }
                }
            }
        }
        count
    }
}

/// Classifies the nodes of a grid with `resolution` cells across the longer side of the box.
pub fn discretize(spec: &DomainSpec, resolution: usize) -> Result<Outcome<MaskedGrid>> {
    discretize_with_box(spec, &spec.confining_box, resolution)
}

/// As [`discretize`], over an explicit box (so several domains can share one lattice).
pub fn discretize_with_box(
    spec: &DomainSpec,
    bx: &BoxRegion,
    resolution: usize,
) -> Result<Outcome<MaskedGrid>> {
    if resolution < 16 {
        return Err(Error::Invalid(format!("resolution {resolution} below 16")));
    }
    if !bx.is_valid() {
        return Err(Error::Invalid("degenerate box".into()));
    }
    let h = bx.width().max(bx.height()) / resolution as f64;
    let nx = ((bx.width() / h) - 1e-9).ceil() as usize;
    let ny = ((bx.height() / h) - 1e-9).ceil() as usize;
    let mut g = MaskedGrid {
        nx,
        ny,
        x0: bx.min.x,
        y0: bx.min.y,
        h,
        nodes: vec![Node::Fluid; nx * ny],
        obstacles: spec.obstacles.len(),
        bounded: spec.is_bounded(),
    };
    let outer = spec.outer();
    for j in 0..ny {
        for i in 0..nx {
            let p = g.pos(i, j);
            let border = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
            let out = border || !bx.contains(p) || outer.is_some_and(|o| !point_in_polygon(p, o));
            if out {
                let k = g.idx(i, j);
                g.nodes[k] = Node::Outer;
            }
        }
    }

    let mut warnings = Vec::new();
    for (oi, set) in spec.obstacles.iter().enumerate() {
        let mut thin = f64::INFINITY;
        for piece in &set.pieces {
            let t = piece.thickness();
            if t < 2.0 * h {
                thin = thin.min(t);
            }
            mark_piece(&mut g, piece, oi, t < 2.0 * h);
        }
        if thin.is_finite() {
            warnings.push(Warning::UnderResolvedObstacle { obstacle: oi, thickness: thin, spacing: h });
        }
        if !g.nodes.iter().any(|n| *n == Node::Obstacle(oi)) {
            warnings.push(Warning::EmptyObstacle { obstacle: oi });
        }
    }
    Ok(Outcome::with_warnings(g, warnings))
}

fn set_obstacle(g: &mut MaskedGrid, i: usize, j: usize, oi: usize) {
    let k = g.idx(i, j);
    if g.nodes[k] != Node::Outer {
        g.nodes[k] = Node::Obstacle(oi);
    }
}

// cells met by a segment, walked at quarter-cell steps
fn mark_segment(g: &mut MaskedGrid, a: Point, b: Point, oi: usize) {
    let steps = ((a.dist(b) / (0.25 * g.h)).ceil() as usize).max(1);
    for s in 0..=steps {
        let p = a + (b - a) * (s as f64 / steps as f64);
        let (i, j) = g.cell_of(p);
        set_obstacle(g, i, j, oi);
    }
}

fn mark_piece(g: &mut MaskedGrid, piece: &Piece, oi: usize, conservative: bool) {
    match piece {
        Piece::Point { at } => {
            let (i, j) = g.cell_of(*at);
            set_obstacle(g, i, j, oi);
        }
        Piece::Polyline { .. } => {
            for (a, b) in piece.segments() {
                mark_segment(g, a, b, oi);
            }
        }
        Piece::Polygon { vertices } => {
            let bb = piece.bbox();
            let (i0, j0) = g.cell_of(bb.min);
            let (i1, j1) = g.cell_of(bb.max);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if point_in_polygon(g.pos(i, j), vertices) {
                        set_obstacle(g, i, j, oi);
                    }
                }
            }
            if conservative {
                for (a, b) in piece.segments() {
                    mark_segment(g, a, b, oi);
                }
            }
        }
    }
}
