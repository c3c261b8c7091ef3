//! Exterior conformal maps and the image-system Biot–Savart law around one obstacle.
//!
//! Points of the plane are identified with complex numbers; `T` maps the exterior
//! of the obstacle onto `|w| > 1` with `T(z) ~ βz`, `β > 0`.

mod bounds;
mod kernel;
mod laurent;

use num_complex::Complex64;

use crate::geometry::Point;

pub use bounds::{annulus_probes, caratheodory_gap, far_field_bound, interpolation_constant, CaratheodoryGap, FarFieldBound, FAR_FIELD_SAMPLES};
pub use kernel::{
    alpha_exterior, biot_savart_exterior, biot_savart_free, biot_savart_mapped, exterior_velocity, harmonic_velocity,
    particle_velocities, Particle, VortexEnsemble,
};
pub use laurent::{fit_exterior_map, fit_exterior_map_with, joukowski_map, scaled_joukowski, FitOptions, LaurentMap, MapForm};

pub(crate) fn to_c(p: Point) -> Complex64 {
    Complex64::new(p.x, p.y)
}

pub(crate) fn to_p(z: Complex64) -> Point {
    Point::new(z.re, z.im)
}
