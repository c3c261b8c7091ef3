use serde::{Deserialize, Serialize};

use super::report::{fit_slope, Check, StudyReport};
use crate::conformal::{exterior_velocity, joukowski_map, VortexEnsemble};
use crate::geometry::Point;
use crate::transport::{drive, Collect, ExteriorObstacle, InitialVorticity, Method, SimConfig, Simulator};
use crate::elliptic::SolveOptions;
use crate::{Error, Outcome, Result};

/// Length of the slit `[−1, 1]`.
pub const ARC_LENGTH: f64 = 2.0;

fn default_alpha() -> f64 {
    1.0
}
fn default_h() -> f64 {
    ARC_LENGTH / 256.0
}
fn default_samples() -> usize {
    48
}
fn default_initial() -> InitialVorticity {
    InitialVorticity::Zero
}

/// Flow around the slit `[−1, 1]`: endpoint singularity and tangential jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcConfig {
    #[serde(default = "default_initial")]
    pub initial: InitialVorticity,
    /// Held harmonic circulation.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Evolution time before sampling (0 samples the initial flow).
    #[serde(default)]
    pub t_final: f64,
    /// Sampling scale; the fit window is `[4h, 0.1·L]` and the jump offset `2h`.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
}

impl Default for ArcConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

/// Endpoint fit of `log |u|` against `log dist` along one ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointFit {
    pub endpoint: Point,
    pub direction: Point,
    pub window: (f64, f64),
    pub slope: f64,
}

/// Jump `[u_τ](s) = u_x(s, +δ) − u_x(s, −δ)` along the slit and endpoint fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcJump {
    pub s: Vec<f64>,
    pub jump: Vec<f64>,
    pub offset: f64,
    pub margin: f64,
    pub fits: Vec<EndpointFit>,
}

fn log_space(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(move |k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
}

/// Samples an ensemble's flow around the slit.
pub fn sample_arc(ens: &VortexEnsemble, h: f64, samples: usize) -> Result<ArcJump> {
    let (lo, hi) = (4.0 * h, 0.1 * ARC_LENGTH);
    if !(h > 0.0) || lo >= hi || samples < 3 {
        return Err(Error::Invalid(format!("offset under-resolved: fit window [4h, 0.1L] = [{lo}, {hi}] is empty")));
    }
    let map = joukowski_map();
    let images = ens.mapped(&map)?;
    let vel = |p: Point| exterior_velocity(&map, ens, &images, p);
    let mut fits = Vec::new();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    for e in [-1.0, 1.0] {
        let end = Point::new(e, 0.0);
        for dir in [Point::new(e, 0.0), Point::new(e * s2, s2), Point::new(e * s2, -s2)] {
            let mut x = Vec::with_capacity(samples);
            let mut y = Vec::with_capacity(samples);
            for d in log_space(lo, hi, samples) {
                let v = vel(end + dir * d)?;
                x.push(d.ln());
                y.push(v.norm().ln());
            }
            fits.push(EndpointFit { endpoint: end, direction: dir, window: (lo, hi), slope: fit_slope(&x, &y) });
        }
    }
    let (offset, margin) = (2.0 * h, 4.0 * h);
    let s: Vec<f64> = (0..samples).map(|k| -1.0 + margin + (2.0 - 2.0 * margin) * k as f64 / (samples - 1) as f64).collect();
    let jump = s
        .iter()
        .map(|&si| Ok(vel(Point::new(si, offset))?.x - vel(Point::new(si, -offset))?.x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ArcJump { s, jump, offset, margin, fits })
}

/// Runs the configured flow around the slit and samples it.
pub fn arc_flow_study(cfg: &ArcConfig) -> Result<Outcome<(ArcJump, StudyReport)>> {
    let sim_cfg = SimConfig {
        method: Method::Particles,
        domain: None,
        obstacle: Some(ExteriorObstacle::Slit),
        initial: cfg.initial.clone(),
        gamma: vec![],
        alpha: cfg.alpha,
        resolution: 0,
        spacing: cfg.spacing,
        blob: None,
        dt: cfg.dt,
        // only validated when no evolution is requested
        t_final: if cfg.t_final > 0.0 { cfg.t_final } else { 1.0 },
        snapshot_every: 0,
        interpolation: Default::default(),
    };
    let built = Simulator::build(&sim_cfg, &SolveOptions::default())?;
    let mut warnings = built.warnings;
    let mut sim = built.value;
    if cfg.t_final > 0.0 {
        warnings.extend(drive(&mut sim, &sim_cfg, &mut Collect::default())?);
    }
    let ens = match &sim {
        Simulator::Particles(p) => p.ensemble.clone(),
        Simulator::Grid(_) => unreachable!("particle config"),
    };
    let jump = sample_arc(&ens, cfg.h, cfg.samples)?;
    let mut report = StudyReport::new(
        "arc_flow",
        serde_json::json!({"config": cfg, "offset": jump.offset, "margin": jump.margin, "particles": ens.particles.len()}),
        &["endpoint_x", "dir_x", "dir_y", "window_lo", "window_hi", "slope"],
    );
    for f in &jump.fits {
        report.push_row(vec![f.endpoint.x, f.direction.x, f.direction.y, f.window.0, f.window.1, f.slope])?;
    }
    if cfg.alpha != 0.0 || !ens.particles.is_empty() {
        for f in jump.fits.iter().filter(|f| f.direction.y == 0.0) {
            report.checks.push(Check::within(&format!("axis slope at x = {}", f.endpoint.x), f.slope, -0.6, -0.4));
        }
    }
    report.warnings = warnings.clone();
    Ok(Outcome::with_warnings((jump, report), warnings))
}
