use serde::{Deserialize, Serialize};

use super::grid::MaskedGrid;
use super::solver::{SolveOptions, StencilOperator};
use crate::geometry::{BoxRegion, Point};
use crate::{Error, Outcome, Result, Warning};

/// Region on which the Poincaré constant is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Window {
    Box { region: BoxRegion },
    Disk { center: Point, radius: f64 },
}

impl Window {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Window::Box { region } => region.contains(p),
            Window::Disk { center, radius } => p.dist(*center) <= *radius,
        }
    }
}

/// `1/√λ₁` for the Laplacian on the fluid nodes of the window: Dirichlet on
/// solid nodes, natural (Neumann) condition where the window cuts the fluid.
///
/// With no solid node inside the window the lowest eigenvalue is zero; the
/// constant is then reported as infinite with a warning.
pub fn poincare_constant(g: &MaskedGrid, window: &Window, opts: &SolveOptions) -> Result<Outcome<f64>> {
    let inside: Vec<bool> = (0..g.len()).map(|k| window.contains(g.pos_of(k))).collect();
    let active: Vec<bool> = (0..g.len()).map(|k| inside[k] && g.is_fluid(k)).collect();
    if !active.iter().any(|a| *a) {
        return Err(Error::Invalid("window contains no fluid node".into()));
    }
    let pinned = (0..g.len()).any(|k| {
        inside[k] && !g.is_fluid(k) && {
            let (i, j) = g.ij(k);
            [(i + 1 < g.nx).then(|| k + 1), (i > 0).then(|| k - 1), (j + 1 < g.ny).then(|| k + g.nx), (j > 0).then(|| k - g.nx)]
                .into_iter()
                .flatten()
                .any(|m| active[m])
        }
    });
    if !pinned {
        return Ok(Outcome::with_warnings(f64::INFINITY, vec![Warning::NoObstacleInWindow]));
    }
    let op = StencilOperator::new(g, &active, |_, b| inside[b]);
    let n = op.len();
    let inner = SolveOptions { rtol: 1e-12, max_iter: opts.max_iter };
    let mut x = vec![1.0; n];
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut ay = vec![0.0; n];
    let mut lambda = f64::INFINITY;
    for _ in 0..1000 {
        y.iter_mut().for_each(|v| *v = 0.0);
        op.solve(&x, &mut y, &inner)?;
        normalize(&mut y);
        op.apply(&y, &mut ay);
        let next: f64 = y.iter().zip(&ay).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut x, &mut y);
        if (next - lambda).abs() <= 1e-8 * next {
            lambda = next;
            let lam = lambda / (g.h * g.h);
            return Ok(Outcome::new(1.0 / lam.sqrt()));
        }
        lambda = next;
    }
    Err(Error::NoConvergence { iterations: 1000, residual: f64::NAN })
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}
