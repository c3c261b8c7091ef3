use serde::{Deserialize, Serialize};

use super::ops::{perp_grad, VectorField};
use crate::elliptic::{solve_masked, HodgeBasis, MaskedGrid, ScalarField, SolveOptions};
use crate::{Error, Result};

/// Vorticity, circulations and the velocity they determine at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    /// Vorticity on fluid nodes (zero elsewhere).
    pub omega: ScalarField,
    /// Weak circulations, one per obstacle.
    pub gamma: Vec<f64>,
    /// `αⁱ = ∫φⁱω + γⁱ`.
    pub alpha: Vec<f64>,
    /// Dirichlet part `ψ⁰` (zero on every solid node).
    pub psi0: ScalarField,
    /// Full stream `ψ⁰ + Σ αⁱψⁱ`.
    pub psi: ScalarField,
    pub u: VectorField,
}

/// `u = ∇⊥ψ⁰ + Σ αⁱ∇⊥ψⁱ` with `Δψ⁰ = ω`, `ψ⁰ = 0` on solid nodes.
pub fn assemble_velocity(
    g: &MaskedGrid,
    basis: &HodgeBasis,
    omega: &ScalarField,
    gamma: &[f64],
    opts: &SolveOptions,
) -> Result<FlowState> {
    assemble_with_guess(g, basis, omega, gamma, opts, None)
}

/// As [`assemble_velocity`], warm-starting the Poisson solve from `guess` (a previous `ψ⁰`).
pub fn assemble_with_guess(
    g: &MaskedGrid,
    basis: &HodgeBasis,
    omega: &ScalarField,
    gamma: &[f64],
    opts: &SolveOptions,
    guess: Option<&ScalarField>,
) -> Result<FlowState> {
    if gamma.len() != basis.len() {
        return Err(Error::CirculationCount { expected: basis.len(), got: gamma.len() });
    }
    if !omega.matches(g) || basis.phi.iter().any(|f| !f.matches(g)) {
        return Err(Error::GridMismatch);
    }
    let mut w = omega.clone();
    for k in 0..g.len() {
        if !g.is_fluid(k) {
            w[k] = 0.0;
        }
    }
    let fixed: Vec<bool> = (0..g.len()).map(|k| !g.is_fluid(k)).collect();
    let zero = ScalarField::zeros(g);
    let (psi0, _) = solve_masked(g, &fixed, &zero, &w, opts, guess)?;

    let h2 = g.h * g.h;
    let alpha: Vec<f64> = basis
        .phi
        .iter()
        .zip(gamma)
        .map(|(phi, &gm)| {
            let s: f64 = (0..g.len()).filter(|&k| g.is_fluid(k)).map(|k| phi[k] * w[k]).sum();
            s * h2 + gm
        })
        .collect();
    let mut psi = psi0.clone();
    for (a, p) in alpha.iter().zip(&basis.psi) {
        psi.axpy(*a, p);
    }
    let u = perp_grad(g, &psi)?;
    Ok(FlowState { t: 0.0, omega: w, gamma: gamma.to_vec(), alpha, psi0, psi, u })
}

/// `∫|u|²`: edge quadrature weighted by the fluid fraction of each edge's endpoints.
pub fn energy(g: &MaskedGrid, u: &VectorField) -> Result<f64> {
    if !u.matches(g) {
        return Err(Error::GridMismatch);
    }
    let fl = |k: usize| if g.is_fluid(k) { 0.5 } else { 0.0 };
    let mut s = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            if j + 1 < g.ny {
                s += (fl(k) + fl(k + g.nx)) * u.ux[k] * u.ux[k];
            }
            if i + 1 < g.nx {
                s += (fl(k) + fl(k + 1)) * u.uy[k] * u.uy[k];
            }
        }
    }
    Ok(s * g.h * g.h)
}

/// `‖ω‖_{L^q}` over fluid nodes; `q = ∞` gives the max.
pub fn lq_norm(g: &MaskedGrid, omega: &ScalarField, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::BadExponent(q));
    }
    if !omega.matches(g) {
        return Err(Error::GridMismatch);
    }
    let vals = (0..g.len()).filter(|&k| g.is_fluid(k)).map(|k| omega[k].abs());
    if q.is_infinite() {
        return Ok(vals.fold(0.0, f64::max));
    }
    let s: f64 = vals.map(|v| v.powf(q)).sum();
    Ok((s * g.h * g.h).powf(1.0 / q))
}
