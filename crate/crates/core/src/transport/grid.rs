use super::advect::{advect, Interpolation};
use super::diagnostics::DiagnosticsRow;
use crate::elliptic::{HodgeBasis, MaskedGrid, ScalarField, SolveOptions};
use crate::hodge::{assemble_with_guess, energy, lq_norm, FlowState};
use crate::Result;

/// Relative level (of `‖ω⁰‖_∞`) above which a node counts as vorticity support.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Semi-Lagrangian vorticity transport on a bounded masked grid with held circulations.
#[derive(Debug, Clone)]
pub struct GridSim {
    pub grid: MaskedGrid,
    pub basis: HodgeBasis,
    pub opts: SolveOptions,
    pub interp: Interpolation,
    pub state: FlowState,
    pub steps: usize,
    threshold: f64,
}

impl GridSim {
    pub fn new(
        grid: MaskedGrid,
        basis: HodgeBasis,
        omega0: &ScalarField,
        gamma: &[f64],
        opts: SolveOptions,
        interp: Interpolation,
    ) -> Result<GridSim> {
        let state = assemble_with_guess(&grid, &basis, omega0, gamma, &opts, None)?;
        let threshold = SUPPORT_THRESHOLD * lq_norm(&grid, &state.omega, f64::INFINITY)?;
        Ok(GridSim { grid, basis, opts, interp, state, steps: 0, threshold })
    }

    /// `h / max(1, ‖u‖_∞)`.
    pub fn default_dt(&self) -> f64 {
        self.grid.h / self.state.u.max_abs().max(1.0)
    }

    /// Advects `ω` by the current velocity and reassembles with the same `γ`.
    /// Returns the number of clamped backtraces.
    pub fn step(&mut self, dt: f64) -> Result<usize> {
        let (omega, clamped) = advect(&self.grid, &self.state.omega, &self.state.u, dt, self.interp)?;
        let gamma = std::mem::take(&mut self.state.gamma);
        let next = assemble_with_guess(&self.grid, &self.basis, &omega, &gamma, &self.opts, Some(&self.state.psi0))?;
        let t = self.state.t + dt;
        self.state = FlowState { t, ..next };
        self.steps += 1;
        Ok(clamped)
    }

    pub fn support_radius(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .filter(|&k| g.is_fluid(k) && self.state.omega[k].abs() > self.threshold)
            .map(|k| g.pos_of(k).norm())
            .fold(0.0, f64::max)
    }

    pub fn diagnostics(&self, clamped: usize) -> Result<DiagnosticsRow> {
        let g = &self.grid;
        let s = &self.state;
        Ok(DiagnosticsRow {
            step: self.steps,
            t: s.t,
            energy: energy(g, &s.u)?,
            omega_l1: lq_norm(g, &s.omega, 1.0)?,
            omega_l2: lq_norm(g, &s.omega, 2.0)?,
            omega_linf: lq_norm(g, &s.omega, f64::INFINITY)?,
            circulation: s.gamma.clone(),
            alpha: s.alpha.clone(),
            support_radius: self.support_radius(),
            clamped,
        })
    }
}
