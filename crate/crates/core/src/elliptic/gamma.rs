use serde::{Deserialize, Serialize};

use super::capacity::dirichlet_energy;
use super::grid::{discretize_with_box, ScalarField};
use super::solver::{solve_dirichlet, SolveOptions};
use crate::geometry::DomainSequence;
use crate::{Error, Outcome, Result, Warning};

/// Per-member `‖∇(ψₙ − ψ)‖_{L²}` with grid-counted complement components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaGap {
    pub resolution: usize,
    pub h: f64,
    pub gaps: Vec<f64>,
    pub components: Vec<usize>,
    pub limit_components: usize,
}

/// Solves `Δψ = f` on every member and on the limit, all on the lattice of the
/// sequence's confining box, and measures the H¹₀ gap of each member to the limit.
///
/// `f` holds nodal values on that lattice.
pub fn gamma_gap(
    seq: &DomainSequence,
    f: &ScalarField,
    resolution: usize,
    opts: &SolveOptions,
) -> Result<Outcome<GammaGap>> {
    let bx = seq.limit.confining_box;
    let mut warnings = Vec::new();
    let lim = discretize_with_box(&seq.limit, &bx, resolution)?;
    warnings.extend(lim.warnings);
    let lim_grid = lim.value;
    if !f.matches(&lim_grid) {
        return Err(Error::GridMismatch);
    }
    let psi_lim = solve_dirichlet(&lim_grid, &masked(f, &lim_grid), opts)?;
    let limit_components = lim_grid.complement_components();

    let mut gaps = Vec::with_capacity(seq.members.len());
    let mut components = Vec::with_capacity(seq.members.len());
    for m in &seq.members {
        let out = discretize_with_box(m, &bx, resolution)?;
        warnings.extend(out.warnings);
        let g = out.value;
        let psi = solve_dirichlet(&g, &masked(f, &g), opts)?;
        let mut diff = psi;
        diff.axpy(-1.0, &psi_lim);
        gaps.push(dirichlet_energy(&g, &diff).sqrt());
        components.push(g.complement_components());
    }
    let max_c = components.iter().copied().max().unwrap_or(0);
    if max_c > seq.component_bound {
        warnings.push(Warning::SverakViolated { max_components: max_c, bound: seq.component_bound });
    }
    Ok(Outcome::with_warnings(
        GammaGap { resolution, h: lim_grid.h, gaps, components, limit_components },
        warnings,
    ))
}

fn masked(f: &ScalarField, g: &super::MaskedGrid) -> ScalarField {
    let mut out = f.clone();
    for k in 0..g.len() {
        if !g.is_fluid(k) {
            out[k] = 0.0;
        }
    }
    out
}
