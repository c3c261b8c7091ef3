//! Vorticity transport on masked grids and by vortex particles.

mod advect;
mod diagnostics;
mod grid;
mod particles;
mod run;

pub use advect::{advect, Interpolation, CFL_LIMIT};
pub use diagnostics::{csv_header, write_csv, DiagnosticsRow};
pub use grid::{GridSim, SUPPORT_THRESHOLD};
pub use particles::{discretize_vorticity, ParticleSim};
pub use run::{
    drive, simulate, Collect, DomainSource, ExteriorObstacle, InitialVorticity, Method, RunObserver, SimConfig, SimRun,
    Simulator, Snapshot,
};
