//! Convergence studies over domain sequences.

mod arc;
mod capacity;
mod continuity;
mod gamma;
mod report;

pub use arc::{arc_flow_study, sample_arc, ArcConfig, ArcJump, EndpointFit, ARC_LENGTH};
pub use capacity::{capacity_dichotomy_study, DichotomyConfig};
pub use continuity::{domain_continuity_study, probe_compact, ContinuityConfig};
pub use gamma::{gamma_dirichlet_study, GammaConfig};
pub use report::{fit_slope, strictly_decreasing, Check, StudyReport};
