//! Ideal incompressible 2D flow in irregular, multiply connected domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: planar compact sets, Hausdorff distances, approximating
//!   domain sequences.
//! * [`elliptic`]: masked-grid Dirichlet solver, capacities, harmonic
//!   measures, γ-gaps and Poincaré constants.
//! * [`hodge`]: velocity assembly from vorticity and circulations on
//!   bounded grids, weak circulations, weak-form residuals.
//! * [`conformal`]: exterior Laurent maps, image-system Biot–Savart law,
//!   far-field bounds.
//! * [`transport`]: vorticity transport (semi-Lagrangian grid or vortex
//!   particles) and conservation diagnostics.
//! * [`experiments`]: convergence studies over domain sequences.
//! * [`io`]: field, matrix, map and ensemble file formats.

pub mod conformal;
pub mod elliptic;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod hodge;
pub mod io;
pub mod transport;

pub use error::{Error, Outcome, Result, Warning};
pub use geometry::{BoxRegion, CompactSet, DomainKind, DomainSequence, DomainSpec, Piece, Point};

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
