//! Velocity from vorticity and circulations on bounded masked grids.
//!
//! Velocities live on the edges of the node lattice (MAC staggering): `ux` on
//! the vertical edge `(i,j)–(i,j+1)`, `uy` on the horizontal edge `(i,j)–(i+1,j)`.
//! With this placement `curl ∘ perp_grad` is the 5-point Laplacian bit for bit.

mod assemble;
mod cutoff;
mod ops;
mod residual;

pub use assemble::{assemble_velocity, assemble_with_guess, energy, lq_norm, FlowState};
pub use cutoff::{cutoff, weak_circulation, CutoffField};
pub use ops::{curl, divergence, laplacian, perp_grad, VectorField};
pub use residual::{convective_pairing, euler_weak_residual, Bump, BumpShape, ResidualAccumulator};
