use serde::{Deserialize, Serialize};

use super::advect::Interpolation;
use super::diagnostics::DiagnosticsRow;
use super::grid::GridSim;
use super::particles::{discretize_vorticity, ParticleSim};
use crate::conformal::{fit_exterior_map, joukowski_map, scaled_joukowski, LaurentMap, Particle, VortexEnsemble};
use crate::elliptic::{discretize, HodgeBasis, SolveOptions};
use crate::geometry::{DomainSpec, Family, Point};
use crate::hodge::FlowState;
use crate::{Error, Outcome, Result, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Grid,
    Particles,
}

/// Initial vorticity; sums are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialVorticity {
    Zero,
    /// `A(1 − r²/ρ²)³` on `r < ρ`.
    RadialBump { center: Point, radius: f64, amplitude: f64 },
    /// `A e^{−r²/2σ²}`, cut at `r = 6σ`.
    Gaussian { center: Point, sigma: f64, amplitude: f64 },
    /// Explicit point vortices (particle method only).
    PointVortices { vortices: Vec<Particle> },
    Sum { parts: Vec<InitialVorticity> },
}

impl InitialVorticity {
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            InitialVorticity::Zero | InitialVorticity::PointVortices { .. } => 0.0,
            InitialVorticity::RadialBump { center, radius, amplitude } => {
                amplitude * (1.0 - (p - *center).norm_sq() / (radius * radius)).max(0.0).powi(3)
            }
            InitialVorticity::Gaussian { center, sigma, amplitude } => {
                let r2 = (p - *center).norm_sq();
                if r2 >= 36.0 * sigma * sigma {
                    0.0
                } else {
                    amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
                }
            }
            InitialVorticity::Sum { parts } => parts.iter().map(|q| q.eval(p)).sum(),
        }
    }

    /// `(centre, radius)` of every smooth part's support.
    fn supports(&self, out: &mut Vec<(Point, f64)>) {
        match self {
            InitialVorticity::RadialBump { center, radius, .. } => out.push((*center, *radius)),
            InitialVorticity::Gaussian { center, sigma, .. } => out.push((*center, 6.0 * sigma)),
            InitialVorticity::Sum { parts } => parts.iter().for_each(|q| q.supports(out)),
            _ => {}
        }
    }

    fn point_vortices(&self, out: &mut Vec<Particle>) {
        match self {
            InitialVorticity::PointVortices { vortices } => out.extend_from_slice(vortices),
            InitialVorticity::Sum { parts } => parts.iter().for_each(|q| q.point_vortices(out)),
            _ => {}
        }
    }

    /// Smallest `ρ₀` with the support inside `B(0, ρ₀)`.
    pub fn support_radius(&self) -> f64 {
        let mut s = Vec::new();
        self.supports(&mut s);
        let mut pv = Vec::new();
        self.point_vortices(&mut pv);
        s.iter().map(|(c, r)| c.norm() + r).chain(pv.iter().map(|p| p.pos.norm())).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            InitialVorticity::Zero => true,
            InitialVorticity::RadialBump { center, radius, amplitude } => center.is_finite() && *radius > 0.0 && amplitude.is_finite(),
            InitialVorticity::Gaussian { center, sigma, amplitude } => center.is_finite() && *sigma > 0.0 && amplitude.is_finite(),
            InitialVorticity::PointVortices { vortices } => vortices.iter().all(|v| v.pos.is_finite() && v.strength.is_finite()),
            InitialVorticity::Sum { parts } => return parts.iter().try_for_each(|q| q.validate()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad initial vorticity {self:?}")))
        }
    }
}

/// Bounded domain given explicitly or as a member of a generated family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSource {
    /// Family id as accepted by [`Family::parse`], e.g. `rugosity:2`.
    Member {
        family: String,
        #[serde(default)]
        alpha: Option<f64>,
        n: usize,
    },
    Spec(DomainSpec),
}

impl DomainSource {
    pub fn spec(&self) -> Result<DomainSpec> {
        match self {
            DomainSource::Spec(s) => Ok(s.clone()),
            DomainSource::Member { family, alpha, n } => {
                if *n == 0 {
                    return Err(Error::Invalid("family members start at n = 1".into()));
                }
                Ok(Family::parse(family, *alpha)?.member(*n))
            }
        }
    }
}

/// Single exterior obstacle for the particle method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExteriorObstacle {
    Disk { center: Point, radius: f64 },
    /// Segment `[−1, 1]`.
    Slit,
    /// Ellipse with foci `±1` and conformal radius `ρ > 1`.
    Ellipse { rho: f64 },
    /// Closed boundary polygon fitted by a Laurent series with `terms` terms.
    Fitted { boundary: Vec<Point>, terms: usize },
}

impl ExteriorObstacle {
    pub fn map(&self) -> Result<LaurentMap> {
        match self {
            ExteriorObstacle::Disk { center, radius } => LaurentMap::disk(*center, *radius),
            ExteriorObstacle::Slit => Ok(joukowski_map()),
            ExteriorObstacle::Ellipse { rho } => scaled_joukowski(*rho),
            ExteriorObstacle::Fitted { boundary, terms } => fit_exterior_map(boundary, *terms),
        }
    }
}

fn default_interp() -> Interpolation {
    Interpolation::default()
}

/// A simulation description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub method: Method,
    /// Bounded domain (grid method).
    #[serde(default)]
    pub domain: Option<DomainSource>,
    /// Exterior obstacle (particle method).
    #[serde(default)]
    pub obstacle: Option<ExteriorObstacle>,
    pub initial: InitialVorticity,
    /// Held weak circulations, one per obstacle (grid method).
    #[serde(default)]
    pub gamma: Vec<f64>,
    /// Held harmonic circulation (particle method).
    #[serde(default)]
    pub alpha: f64,
    /// Grid resolution across the confining box (grid method).
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Lattice spacing of the initial particles; blobs get twice this radius.
    #[serde(default)]
    pub spacing: Option<f64>,
    /// Blob radius override (particle method).
    #[serde(default)]
    pub blob: Option<f64>,
    /// Fixed time step; the default adapts to `h / max(1, ‖u‖_∞)` each step.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_final: f64,
    /// Keep a snapshot every this many steps (the first and last are always kept).
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "default_interp")]
    pub interpolation: Interpolation,
}

fn default_resolution() -> usize {
    128
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Invalid(format!("t_final must be positive, got {}", self.t_final)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
            }
        }
        self.initial.validate()?;
        match self.method {
            Method::Grid => {
                if self.domain.is_none() {
                    return Err(Error::Invalid("grid method needs a domain".into()));
                }
                if self.resolution < 8 {
                    return Err(Error::Invalid("resolution must be at least 8".into()));
                }
                let mut pv = Vec::new();
                self.initial.point_vortices(&mut pv);
                if !pv.is_empty() {
                    return Err(Error::Invalid("point vortices need the particle method".into()));
                }
            }
            Method::Particles => {
                if self.obstacle.is_none() {
                    return Err(Error::Invalid("particle method needs an exterior obstacle".into()));
                }
                if let Some(s) = self.spacing {
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(Error::Invalid("spacing must be positive".into()));
                    }
                }
                if !self.alpha.is_finite() {
                    return Err(Error::Invalid("α must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

/// A stored instant of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Snapshot {
    Grid(FlowState),
    Particles { t: f64, ensemble: VortexEnsemble },
}

impl Snapshot {
    pub fn t(&self) -> f64 {
        match self {
            Snapshot::Grid(s) => s.t,
            Snapshot::Particles { t, .. } => *t,
        }
    }
}

/// Trajectory and per-step diagnostics of a finished run.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub config: SimConfig,
    pub trajectory: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticsRow>,
}

/// Simulator built from a config.
#[derive(Debug, Clone)]
pub enum Simulator {
    Grid(Box<GridSim>),
    Particles(ParticleSim),
}

impl Simulator {
    pub fn build(cfg: &SimConfig, opts: &SolveOptions) -> Result<Outcome<Simulator>> {
        cfg.validate()?;
        match cfg.method {
            Method::Grid => {
                let spec = cfg.domain.as_ref().expect("validated").spec()?;
                let grid = discretize(&spec, cfg.resolution)?;
                let warnings = grid.warnings;
                let grid = grid.value;
                let gamma = if cfg.gamma.is_empty() && grid.obstacles > 0 {
                    vec![0.0; grid.obstacles]
                } else {
                    cfg.gamma.clone()
                };
                let basis = HodgeBasis::build(&grid, opts)?;
                let w0 = grid.sample_fluid(|p| cfg.initial.eval(p));
                let sim = GridSim::new(grid, basis, &w0, &gamma, *opts, cfg.interpolation)?;
                Ok(Outcome::with_warnings(Simulator::Grid(Box::new(sim)), warnings))
            }
            Method::Particles => {
                let map = cfg.obstacle.as_ref().expect("validated").map()?;
                let s = cfg.spacing.unwrap_or(0.05);
                let mut parts = Vec::new();
                cfg.initial.point_vortices(&mut parts);
                let mut smooth = Vec::new();
                cfg.initial.supports(&mut smooth);
                for (c, r) in smooth {
                    // lattice anchored at the origin so that overlapping parts share sites
                    let n = ((c.norm() + r) / s).ceil() * s;
                    let lattice = discretize_vorticity(&map, Point::default(), n, s, |p| {
                        if (p - c).norm() < r {
                            cfg.initial.eval(p)
                        } else {
                            0.0
                        }
                    });
                    for q in lattice {
                        if !parts.iter().any(|e: &Particle| e.pos == q.pos) {
                            parts.push(q);
                        }
                    }
                }
                let has_smooth = parts.len() > {
                    let mut pv = Vec::new();
                    cfg.initial.point_vortices(&mut pv);
                    pv.len()
                };
                let blob = cfg.blob.unwrap_or(if has_smooth { 2.0 * s } else { 0.0 });
                let ens = VortexEnsemble::new(parts, cfg.alpha, blob);
                Ok(Outcome::new(Simulator::Particles(ParticleSim::new(map, ens)?)))
            }
        }
    }

    pub fn t(&self) -> f64 {
        match self {
            Simulator::Grid(g) => g.state.t,
            Simulator::Particles(p) => p.t,
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        match self {
            Simulator::Grid(g) => Snapshot::Grid(g.state.clone()),
            Simulator::Particles(p) => Snapshot::Particles { t: p.t, ensemble: p.ensemble.clone() },
        }
    }

    pub fn diagnostics(&self, clamped: usize) -> Result<DiagnosticsRow> {
        match self {
            Simulator::Grid(g) => g.diagnostics(clamped),
            Simulator::Particles(p) => Ok(p.diagnostics()),
        }
    }

    fn default_dt(&self, spacing: f64) -> Result<f64> {
        match self {
            Simulator::Grid(g) => Ok(g.default_dt()),
            Simulator::Particles(p) => p.default_dt(spacing),
        }
    }

    fn step(&mut self, dt: f64) -> Result<usize> {
        match self {
            Simulator::Grid(g) => g.step(dt),
            Simulator::Particles(p) => p.step(dt).map(|_| 0),
        }
    }
}

/// Hooks called as a run progresses.
pub trait RunObserver {
    fn row(&mut self, _row: &DiagnosticsRow) -> Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _snap: &Snapshot) -> Result<()> {
        Ok(())
    }
    fn state(&mut self, _sim: &Simulator) -> Result<()> {
        Ok(())
    }
}

/// Observer that keeps everything in memory.
#[derive(Debug, Default)]
pub struct Collect {
    pub rows: Vec<DiagnosticsRow>,
    pub snapshots: Vec<Snapshot>,
}

impl RunObserver for Collect {
    fn row(&mut self, row: &DiagnosticsRow) -> Result<()> {
        self.rows.push(row.clone());
        Ok(())
    }
    fn snapshot(&mut self, snap: &Snapshot) -> Result<()> {
        self.snapshots.push(snap.clone());
        Ok(())
    }
}

/// Advances `sim` to `cfg.t_final`, reporting a diagnostics row per step and
/// snapshots at the configured cadence. Clamped backtraces become warnings.
pub fn drive(sim: &mut Simulator, cfg: &SimConfig, obs: &mut dyn RunObserver) -> Result<Vec<Warning>> {
    let t_final = cfg.t_final;
    let spacing = cfg.spacing.unwrap_or(0.05);
    let fixed = cfg.dt.map(|dt| {
        let n = (t_final / dt).ceil().max(1.0);
        (n as usize, t_final / n)
    });
    let mut warnings = Vec::new();
    obs.row(&sim.diagnostics(0)?)?;
    obs.snapshot(&sim.snapshot())?;
    obs.state(sim)?;
    let mut step = 0usize;
    loop {
        let dt = match fixed {
            Some((n, _)) if step >= n => break,
            Some((n, dt)) => {
                if step + 1 == n {
                    t_final - sim.t()
                } else {
                    dt
                }
            }
            None => {
                let left = t_final - sim.t();
                if left <= 1e-12 * t_final {
                    break;
                }
                let dt = sim.default_dt(spacing)?;
                // avoid a sliver step at the end
                if dt * 1.5 >= left {
                    left
                } else {
                    dt
                }
            }
        };
        let clamped = sim.step(dt)?;
        step += 1;
        if clamped > 0 {
            warnings.push(Warning::BacktraceClamped { count: clamped });
        }
        obs.row(&sim.diagnostics(clamped)?)?;
        obs.state(sim)?;
        let last = match fixed {
            Some((n, _)) => step == n,
            None => t_final - sim.t() <= 1e-12 * t_final,
        };
        if last || (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) {
            obs.snapshot(&sim.snapshot())?;
        }
    }
    Ok(warnings)
}

/// Builds and runs a config, keeping all rows and snapshots.
pub fn simulate(cfg: &SimConfig) -> Result<Outcome<SimRun>> {
    let opts = SolveOptions::default();
    let built = Simulator::build(cfg, &opts)?;
    let mut warnings = built.warnings;
    let mut sim = built.value;
    let mut c = Collect::default();
    warnings.extend(drive(&mut sim, cfg, &mut c)?);
    Ok(Outcome::with_warnings(SimRun { config: cfg.clone(), trajectory: c.snapshots, diagnostics: c.rows }, warnings))
}
