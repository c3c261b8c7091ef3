use std::f64::consts::PI;

use super::diagnostics::DiagnosticsRow;
use crate::conformal::{particle_velocities, LaurentMap, Particle, VortexEnsemble};
use crate::geometry::Point;
use crate::Result;

/// Vortex particles around one exterior obstacle, advanced by RK4 with fixed strengths.
#[derive(Debug, Clone)]
pub struct ParticleSim {
    pub map: LaurentMap,
    pub ensemble: VortexEnsemble,
    pub t: f64,
    pub steps: usize,
}

impl ParticleSim {
    pub fn new(map: LaurentMap, ensemble: VortexEnsemble) -> Result<ParticleSim> {
        ensemble.validate(&map)?;
        Ok(ParticleSim { map, ensemble, t: 0.0, steps: 0 })
    }

    pub fn velocities(&self) -> Result<Vec<Point>> {
        particle_velocities(&self.map, &self.ensemble)
    }

    fn shifted(&self, k: &[Point], s: f64) -> VortexEnsemble {
        let mut e = self.ensemble.clone();
        for (p, v) in e.particles.iter_mut().zip(k) {
            p.pos = p.pos + *v * s;
        }
        e
    }

    /// `ℓ / max(1, max |u_j|)` for a reference length `ℓ`.
    pub fn default_dt(&self, length: f64) -> Result<f64> {
        let vmax = self.velocities()?.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(length / vmax.max(1.0))
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        let map = &self.map;
        let k1 = particle_velocities(map, &self.ensemble)?;
        let k2 = particle_velocities(map, &self.shifted(&k1, 0.5 * dt))?;
        let k3 = particle_velocities(map, &self.shifted(&k2, 0.5 * dt))?;
        let k4 = particle_velocities(map, &self.shifted(&k3, dt))?;
        for (j, p) in self.ensemble.particles.iter_mut().enumerate() {
            p.pos = p.pos + (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0);
        }
        self.t += dt;
        self.steps += 1;
        Ok(())
    }

    /// Peak of the blob-smoothed vorticity `Σ Γ_j e^{−|x−y_j|²/δ²}/(πδ²)` over particle sites.
    pub fn peak_vorticity(&self) -> f64 {
        let e = &self.ensemble;
        if e.blob == 0.0 {
            return f64::NAN;
        }
        let d2 = e.blob * e.blob;
        e.particles
            .iter()
            .map(|a| e.particles.iter().map(|b| b.strength * (-(a.pos - b.pos).norm_sq() / d2).exp()).sum::<f64>().abs())
            .fold(0.0, f64::max)
            / (PI * d2)
    }

    pub fn diagnostics(&self) -> DiagnosticsRow {
        DiagnosticsRow {
            step: self.steps,
            t: self.t,
            energy: f64::NAN,
            omega_l1: self.ensemble.l1(),
            omega_l2: f64::NAN,
            omega_linf: self.peak_vorticity(),
            circulation: vec![self.ensemble.alpha],
            alpha: vec![],
            support_radius: self.ensemble.support_radius(),
            clamped: 0,
        }
    }
}

/// Lattice particles of spacing `s` carrying `ω(x)s²` at every exterior site of the
/// box `[c − r, c + r]²` where `ω ≠ 0`.
pub fn discretize_vorticity(map: &LaurentMap, center: Point, r: f64, s: f64, omega: impl Fn(Point) -> f64) -> Vec<Particle> {
    let n = (r / s).ceil() as i64;
    let mut out = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            let p = center + Point::new(i as f64 * s, j as f64 * s);
            let w = omega(p);
            if w == 0.0 {
                continue;
            }
            if map.eval(crate::conformal::to_c(p)).map_or(false, |z| z.norm() > 1.0) {
                out.push(Particle { pos: p, strength: w * s * s });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::joukowski_map;

    #[test]
    fn strengths_and_count_are_invariant() {
        let map = LaurentMap::disk(Point::default(), 1.0).unwrap();
        let parts = discretize_vorticity(&map, Point::new(1.8, 0.0), 0.3, 0.05, |p| {
            (1.0 - ((p - Point::new(1.8, 0.0)).norm() / 0.3).powi(2)).max(0.0).powi(3)
        });
        let ens = VortexEnsemble::new(parts, 0.5, 0.1);
        let before: Vec<f64> = ens.particles.iter().map(|p| p.strength).collect();
        let total = ens.total_strength();
        let mut sim = ParticleSim::new(map, ens).unwrap();
        for _ in 0..5 {
            sim.step(0.02).unwrap();
        }
        let after: Vec<f64> = sim.ensemble.particles.iter().map(|p| p.strength).collect();
        assert_eq!(before, after);
        assert_eq!(sim.ensemble.total_strength().to_bits(), total.to_bits());
        assert!(sim.ensemble.validate(&sim.map).is_ok());
    }

    #[test]
    fn single_vortex_orbits_disk_at_image_speed() {
        // with α = 0 the image −Γ at 1/d drives the vortex clockwise on |x| = d
        // with speed Γ/(2π(d − 1/d))
        let d = 2.0;
        let map = LaurentMap::disk(Point::default(), 1.0).unwrap();
        let ens = VortexEnsemble::new(vec![Particle { pos: Point::new(d, 0.0), strength: 1.0 }], 0.0, 0.0);
        let mut sim = ParticleSim::new(map, ens).unwrap();
        let speed = 1.0 / (2.0 * PI) / (d - 1.0 / d);
        let t_end = 1.0;
        let n = 100;
        for _ in 0..n {
            sim.step(t_end / n as f64).unwrap();
        }
        let p = sim.ensemble.particles[0].pos;
        let ang = speed * t_end / d;
        assert!((p.norm() - d).abs() < 1e-10);
        assert!((p - Point::new(d * ang.cos(), -d * ang.sin())).norm() < 1e-9);
    }

    #[test]
    fn discretisation_skips_obstacle_and_zeros() {
        let map = joukowski_map();
        let parts = discretize_vorticity(&map, Point::default(), 1.5, 0.1, |p| if p.norm() < 1.5 { 1.0 } else { 0.0 });
        assert!(!parts.is_empty());
        assert!(parts.iter().all(|p| p.pos.y != 0.0 || p.pos.x.abs() > 1.0));
        assert!(parts.iter().all(|p| (p.strength - 0.01).abs() < 1e-15));
    }
}
