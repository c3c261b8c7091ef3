use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::laurent::LaurentMap;
use super::{to_c, to_p};
use crate::geometry::{point_in_polygon, segment_distance, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pos: Point,
    pub strength: f64,
}

/// Blob-regularised point vortices plus the harmonic circulation `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexEnsemble {
    pub particles: Vec<Particle>,
    pub alpha: f64,
    /// Gaussian blob radius; `0` gives bare point vortices.
    pub blob: f64,
}

impl VortexEnsemble {
    pub fn new(particles: Vec<Particle>, alpha: f64, blob: f64) -> Self {
        VortexEnsemble { particles, alpha, blob }
    }

    pub fn total_strength(&self) -> f64 {
        self.particles.iter().map(|p| p.strength).sum()
    }

    /// `Σ|Γ_j|`, the `L¹` norm of the carried vorticity.
    pub fn l1(&self) -> f64 {
        self.particles.iter().map(|p| p.strength.abs()).sum()
    }

    /// Largest distance of a particle from the origin.
    pub fn support_radius(&self) -> f64 {
        self.particles.iter().map(|p| p.pos.norm()).fold(0.0, f64::max)
    }

    /// Every particle strictly exterior and every strength finite.
    pub fn validate(&self, map: &LaurentMap) -> Result<()> {
        if !(self.blob >= 0.0 && self.blob.is_finite() && self.alpha.is_finite()) {
            return Err(Error::Invalid("blob radius and α must be finite, blob ≥ 0".into()));
        }
        for p in &self.particles {
            if !p.strength.is_finite() {
                return Err(Error::Invalid("non-finite particle strength".into()));
            }
            let w = map.eval(to_c(p.pos))?;
            if !(w.norm() > 1.0) {
                return Err(Error::InsideObstacle((p.pos.x, p.pos.y)));
            }
        }
        Ok(())
    }

    /// Images `T(y_j)` of all particles.
    pub fn mapped(&self, map: &LaurentMap) -> Result<Vec<Complex64>> {
        self.particles.iter().map(|p| map.eval(to_c(p.pos))).collect()
    }
}

// (1 − e^{−r²/δ²})/r² for the direct term
fn direct_factor(d2: f64, blob: f64) -> f64 {
    if blob > 0.0 {
        let s = d2 / (blob * blob);
        if s < 1e-8 {
            // series of (1 − e^{−s})/s
            (1.0 - 0.5 * s) / (blob * blob)
        } else {
            -(-s).exp_m1() / d2
        }
    } else {
        1.0 / d2
    }
}

/// Mapped-plane kernel sum `Σ Γ_j [(ζ − ζ_j)/|ζ − ζ_j|² − (ζ − ζ_j*)/|ζ − ζ_j*|²]⊥`,
/// skipping index `skip` in the direct term. Summed sequentially in index order.
fn kernel_sum(zeta: Complex64, images: &[Complex64], ens: &VortexEnsemble, skip: Option<usize>, image_term: bool) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for (j, (zj, p)) in images.iter().zip(&ens.particles).enumerate() {
        if p.strength == 0.0 {
            continue;
        }
        if Some(j) != skip {
            let d = zeta - zj;
            let d2 = d.norm_sqr();
            if d2 == 0.0 {
                if ens.blob == 0.0 {
                    return Err(Error::Coincident);
                }
            } else {
                s += d * (p.strength * direct_factor(d2, ens.blob));
            }
        }
        if image_term {
            let star = zj / zj.norm_sqr();
            let d = zeta - star;
            s -= d * (p.strength / d.norm_sqr());
        }
    }
    Ok(s * Complex64::i())
}

/// Vorticity-induced velocity `(1/2π) DTᵀ(x) Σ_j Γ_j[…]⊥` at `x`.
pub fn biot_savart_exterior(map: &LaurentMap, ens: &VortexEnsemble, x: Point) -> Result<Point> {
    let images = ens.mapped(map)?;
    biot_savart_mapped(map, ens, &images, x, None)
}

/// As [`biot_savart_exterior`] with precomputed particle images; `skip` drops one
/// particle's self-interaction (its own image is kept).
pub fn biot_savart_mapped(
    map: &LaurentMap,
    ens: &VortexEnsemble,
    images: &[Complex64],
    x: Point,
    skip: Option<usize>,
) -> Result<Point> {
    let (zeta, d) = map.eval_with_deriv(to_c(x))?;
    let v = kernel_sum(zeta, images, ens, skip, true)?;
    Ok(to_p(d.conj() * v / (2.0 * PI)))
}

/// Free-space version without the image term, used as a regression guard.
pub fn biot_savart_free(map: &LaurentMap, ens: &VortexEnsemble, x: Point) -> Result<Point> {
    let images = ens.mapped(map)?;
    let (zeta, d) = map.eval_with_deriv(to_c(x))?;
    let v = kernel_sum(zeta, &images, ens, None, false)?;
    Ok(to_p(d.conj() * v / (2.0 * PI)))
}

/// Unit-circulation harmonic field `(1/2π) DTᵀ(x) T(x)⊥/|T(x)|²`.
pub fn harmonic_velocity(map: &LaurentMap, x: Point) -> Result<Point> {
    let (w, d) = map.eval_with_deriv(to_c(x))?;
    Ok(to_p(d.conj() * Complex64::i() * w / (2.0 * PI * w.norm_sqr())))
}

/// Full velocity `K[ω] + α H` at `x`.
pub fn exterior_velocity(map: &LaurentMap, ens: &VortexEnsemble, images: &[Complex64], x: Point) -> Result<Point> {
    let (w, d) = map.eval_with_deriv(to_c(x))?;
    let v = kernel_sum(w, images, ens, None, true)? + Complex64::i() * w * (ens.alpha / w.norm_sqr());
    Ok(to_p(d.conj() * v / (2.0 * PI)))
}

/// Velocities of all particles (self term removed), in parallel with a fixed per-target order.
pub fn particle_velocities(map: &LaurentMap, ens: &VortexEnsemble) -> Result<Vec<Point>> {
    let images = ens.mapped(map)?;
    let derivs: Vec<Complex64> = ens
        .particles
        .iter()
        .map(|p| map.eval_with_deriv(to_c(p.pos)).map(|(_, d)| d))
        .collect::<Result<_>>()?;
    (0..ens.particles.len())
        .into_par_iter()
        .map(|i| {
            let w = images[i];
            let v = kernel_sum(w, &images, ens, Some(i), true)? + Complex64::i() * w * (ens.alpha / w.norm_sqr());
            Ok(to_p(derivs[i].conj() * v / (2.0 * PI)))
        })
        .collect()
}

/// `α = ∮_J u·τ ds + Σ_{y_j ∉ Int J} Γ_j` with trapezoid quadrature on the closed
/// loop `J` and the velocities sampled at its vertices.
pub fn alpha_exterior(map: &LaurentMap, lp: &[Point], velocities: &[Point], ens: &VortexEnsemble) -> Result<f64> {
    if lp.len() < 3 || lp.len() != velocities.len() {
        return Err(Error::Invalid("loop needs ≥ 3 vertices with one velocity each".into()));
    }
    for p in lp {
        map.eval(to_c(*p))?;
    }
    // the obstacle must lie inside J
    let inner = map.inverse(Complex64::new(1.0, 0.0));
    if !point_in_polygon(to_p(inner), lp) {
        return Err(Error::Invalid("loop does not enclose the obstacle".into()));
    }
    let n = lp.len();
    let mut circ = 0.0;
    for i in 0..n {
        let (a, b) = (lp[i], lp[(i + 1) % n]);
        circ += 0.5 * (velocities[i] + velocities[(i + 1) % n]).dot(b - a);
    }
    let margin = 2.0 * ens.blob;
    let mut outside = 0.0;
    for p in &ens.particles {
        if margin > 0.0 {
            let d = (0..n).map(|i| segment_distance(p.pos, lp[i], lp[(i + 1) % n])).fold(f64::INFINITY, f64::min);
            if d < margin {
                return Err(Error::Invalid("vorticity blob straddles the loop".into()));
            }
        }
        if !point_in_polygon(p.pos, lp) {
            outside += p.strength;
        }
    }
    Ok(circ + outside)
}
