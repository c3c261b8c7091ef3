use serde::{Deserialize, Serialize};

use super::ops::{perp_grad, VectorField};
use crate::elliptic::{distance_to_nodes, MaskedGrid, Node, ScalarField};
use crate::{Error, Result};

/// Smooth cutoff around one obstacle: 1 within `eps` of it, 0 beyond `2 eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffField {
    pub obstacle: usize,
    pub eps: f64,
    pub chi: ScalarField,
}

// quintic smoothstep, C² at both ends
fn ramp(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (6.0 * t - 15.0))
}

/// Builds `χ^{i,ε}` from the distance to the nodes of obstacle `i`.
pub fn cutoff(g: &MaskedGrid, obstacle: usize, eps: f64) -> Result<CutoffField> {
    if obstacle >= g.obstacles {
        return Err(Error::Invalid(format!("no obstacle {obstacle}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Invalid(format!("cutoff width must be positive, got {eps}")));
    }
    let mask = g.obstacle_mask(obstacle);
    if !mask.iter().any(|b| *b) {
        return Err(Error::Invalid(format!("obstacle {obstacle} has no grid nodes")));
    }
    let d = distance_to_nodes(g, &mask);
    let data: Vec<f64> = d.iter().map(|&d| ramp((2.0 * eps - d) / eps)).collect();
    for (k, &c) in data.iter().enumerate() {
        if c > 0.0 && !g.is_fluid(k) && g.nodes[k] != Node::Obstacle(obstacle) {
            return Err(Error::OverlappingCutoff { obstacle });
        }
    }
    Ok(CutoffField { obstacle, eps, chi: ScalarField::from_vec(g, data)? })
}

/// `γ = −∫ χ ω − ∫ u·∇⊥χ`, with `ω` taken on fluid nodes.
pub fn weak_circulation(g: &MaskedGrid, u: &VectorField, omega: &ScalarField, chi: &CutoffField) -> Result<f64> {
    if !u.matches(g) || !omega.matches(g) || !chi.chi.matches(g) {
        return Err(Error::GridMismatch);
    }
    let h2 = g.h * g.h;
    let mut bulk = 0.0;
    for k in 0..g.len() {
        if g.is_fluid(k) {
            bulk += chi.chi[k] * omega[k];
        }
    }
    let dchi = perp_grad(g, &chi.chi)?;
    let flux: f64 = u.ux.iter().zip(&dchi.ux).map(|(a, b)| a * b).sum::<f64>()
        + u.uy.iter().zip(&dchi.uy).map(|(a, b)| a * b).sum::<f64>();
    Ok(-(bulk + flux) * h2)
}
