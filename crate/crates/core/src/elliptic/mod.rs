//! Masked-grid Dirichlet problems: capacities, harmonic measures, the Gram
//! matrix of a multiply connected domain, γ-gaps and Poincaré constants.

mod capacity;
mod edt;
mod gamma;
mod grid;
mod poincare;
pub(crate) mod solver;

pub use capacity::{
    capacity, capacity_of_nodes, dirichlet_energy, dirichlet_inner, gram_and_coefficients,
    harmonic_measure, HodgeBasis,
};
pub use edt::distance_to_nodes;
pub use gamma::{gamma_gap, GammaGap};
pub use grid::{discretize, discretize_with_box, MaskedGrid, Node, ScalarField};
pub use poincare::{poincare_constant, Window};
pub use solver::{solve_dirichlet, solve_masked, SolveOptions, SolveReport, StencilOperator};
