use serde::{Deserialize, Serialize};

use crate::elliptic::solver::laplacian_at;
use crate::elliptic::{MaskedGrid, ScalarField};
use crate::geometry::Point;
use crate::{Error, Result};

/// Edge-staggered velocity.
///
/// `ux[idx(i,j)]` sits at `(x_i, y_j + h/2)`, `uy[idx(i,j)]` at `(x_i + h/2, y_j)`;
/// entries past the last row/column are unused and kept at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub nx: usize,
    pub ny: usize,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
}

impl VectorField {
    pub fn zeros(g: &MaskedGrid) -> Self {
        VectorField { nx: g.nx, ny: g.ny, ux: vec![0.0; g.len()], uy: vec![0.0; g.len()] }
    }

    pub fn matches(&self, g: &MaskedGrid) -> bool {
        self.nx == g.nx && self.ny == g.ny && self.ux.len() == g.len() && self.uy.len() == g.len()
    }

    /// Samples a velocity function at the edge midpoints.
    pub fn sample(g: &MaskedGrid, f: impl Fn(Point) -> Point) -> Self {
        let mut u = Self::zeros(g);
        let half = 0.5 * g.h;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.idx(i, j);
                let p = g.pos(i, j);
                if j + 1 < g.ny {
                    u.ux[k] = f(Point::new(p.x, p.y + half)).x;
                }
                if i + 1 < g.nx {
                    u.uy[k] = f(Point::new(p.x + half, p.y)).y;
                }
            }
        }
        u
    }

    /// Velocity at node `k` averaged from the four surrounding edges.
    pub fn at_node(&self, g: &MaskedGrid, k: usize) -> Point {
        let (i, j) = g.ij(k);
        let ux = if j > 0 && j + 1 < g.ny { 0.5 * (self.ux[k] + self.ux[k - g.nx]) } else { 0.0 };
        let uy = if i > 0 && i + 1 < g.nx { 0.5 * (self.uy[k] + self.uy[k - 1]) } else { 0.0 };
        Point::new(ux, uy)
    }

    /// Bilinear interpolation of each staggered component at an arbitrary point
    /// (clamped to the grid).
    pub fn at_point(&self, g: &MaskedGrid, p: Point) -> Point {
        let h = g.h;
        // ux lives on a lattice shifted by (0, h/2), uy on one shifted by (h/2, 0)
        let ux = staggered_bilinear(&self.ux, g.nx, g.nx, g.ny - 1, g.x0 + 0.5 * h, g.y0 + h, h, p);
        let uy = staggered_bilinear(&self.uy, g.nx, g.nx - 1, g.ny, g.x0 + h, g.y0 + 0.5 * h, h, p);
        Point::new(ux, uy)
    }

    pub fn axpy(&mut self, a: f64, x: &VectorField) {
        for (s, v) in self.ux.iter_mut().zip(&x.ux) {
            *s += a * v;
        }
        for (s, v) in self.uy.iter_mut().zip(&x.uy) {
            *s += a * v;
        }
    }

    /// Max over edges of the component magnitudes.
    pub fn max_abs(&self) -> f64 {
        self.ux.iter().chain(&self.uy).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ_edges u²` (no weights, no `h²`).
    pub fn sum_sq(&self) -> f64 {
        self.ux.iter().chain(&self.uy).map(|v| v * v).sum()
    }
}

// bilinear interpolation on an (mx × my) lattice with origin (ox, oy), clamped to the lattice
#[allow(clippy::too_many_arguments)]
fn staggered_bilinear(v: &[f64], stride: usize, mx: usize, my: usize, ox: f64, oy: f64, h: f64, p: Point) -> f64 {
    let fx = ((p.x - ox) / h).clamp(0.0, (mx - 1) as f64);
    let fy = ((p.y - oy) / h).clamp(0.0, (my - 1) as f64);
    let i = (fx.floor() as usize).min(mx - 2);
    let j = (fy.floor() as usize).min(my - 2);
    let (tx, ty) = (fx - i as f64, fy - j as f64);
    let at = |a: usize, b: usize| v[b * stride + a];
    (1.0 - tx) * (1.0 - ty) * at(i, j)
        + tx * (1.0 - ty) * at(i + 1, j)
        + (1.0 - tx) * ty * at(i, j + 1)
        + tx * ty * at(i + 1, j + 1)
}

/// `∇⊥ψ = (−∂_y ψ, ∂_x ψ)` on every edge.
pub fn perp_grad(g: &MaskedGrid, psi: &ScalarField) -> Result<VectorField> {
    if !psi.matches(g) {
        return Err(Error::GridMismatch);
    }
    let mut u = VectorField::zeros(g);
    let h = g.h;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            if j + 1 < g.ny {
                u.ux[k] = -((psi[k + g.nx] - psi[k]) / h);
            }
            if i + 1 < g.nx {
                u.uy[k] = (psi[k + 1] - psi[k]) / h;
            }
        }
    }
    Ok(u)
}

/// `∂_x u_y − ∂_y u_x` at every non-border node (zero on the border).
pub fn curl(g: &MaskedGrid, u: &VectorField) -> Result<ScalarField> {
    if !u.matches(g) {
        return Err(Error::GridMismatch);
    }
    let mut w = ScalarField::zeros(g);
    let h = g.h;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let k = g.idx(i, j);
            w[k] = (u.uy[k] - u.uy[k - 1]) / h - (u.ux[k] - u.ux[k - g.nx]) / h;
        }
    }
    Ok(w)
}

/// 5-point Laplacian at every non-border node.
pub fn laplacian(g: &MaskedGrid, psi: &ScalarField) -> Result<ScalarField> {
    if !psi.matches(g) {
        return Err(Error::GridMismatch);
    }
    let mut w = ScalarField::zeros(g);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let k = g.idx(i, j);
            w[k] = laplacian_at(g, psi, k);
        }
    }
    Ok(w)
}

/// Divergence at cell centres `(x_i + h/2, y_j + h/2)`, stored at `idx(i, j)`.
pub fn divergence(g: &MaskedGrid, u: &VectorField) -> Result<Vec<f64>> {
    if !u.matches(g) {
        return Err(Error::GridMismatch);
    }
    let mut d = vec![0.0; g.len()];
    let h = g.h;
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let k = g.idx(i, j);
            d[k] = (u.ux[k + 1] - u.ux[k]) / h + (u.uy[k + g.nx] - u.uy[k]) / h;
        }
    }
    Ok(d)
}
