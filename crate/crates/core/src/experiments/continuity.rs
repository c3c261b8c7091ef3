use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{strictly_decreasing, Check, StudyReport};
use crate::elliptic::{discretize_with_box, distance_to_nodes, HodgeBasis, MaskedGrid, SolveOptions};
use crate::geometry::{DomainSpec, Family};
use crate::hodge::VectorField;
use crate::transport::{GridSim, InitialVorticity, Interpolation};
use crate::{Error, Outcome, Result, Warning};

fn default_margin() -> f64 {
    4.0
}

fn default_ratio() -> f64 {
    0.3
}

/// Velocity continuity along a domain sequence at matched resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuityConfig {
    pub family: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Member indices `n`, in the order the gaps are expected to decrease.
    pub members: Vec<usize>,
    pub initial: InitialVorticity,
    /// Held circulations (zeros if empty).
    #[serde(default)]
    pub gamma: Vec<f64>,
    pub t_final: f64,
    pub resolution: usize,
    /// Shared time step; defaults to `h / max(1, ‖u⁰‖_∞)` of the limit run.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Probe compact: fluid nodes at least this many `h` from every solid node of every grid.
    #[serde(default = "default_margin")]
    pub probe_margin: f64,
    /// Declared bound on `gap_last / gap_first`.
    #[serde(default = "default_ratio")]
    pub final_ratio: f64,
    #[serde(default)]
    pub interpolation: Interpolation,
}

/// Fluid nodes of every grid at distance `≥ margin` from all their solid nodes.
pub fn probe_compact(grids: &[&MaskedGrid], margin: f64) -> Result<Vec<bool>> {
    let g0 = grids[0];
    if grids.iter().any(|g| !g.same_lattice(g0)) {
        return Err(Error::GridMismatch);
    }
    let solid: Vec<bool> = (0..g0.len()).map(|k| grids.iter().any(|g| !g.is_fluid(k))).collect();
    let d = distance_to_nodes(g0, &solid);
    Ok(d.iter().map(|&v| v >= margin).collect())
}

/// MAC edges with both endpoints in `k`: `(index, is_ux)`.
fn probe_edges(g: &MaskedGrid, k: &[bool]) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    g.for_each_edge(|p, q| {
        if k[p] && k[q] {
            // for_each_edge yields p < q; vertical neighbours carry ux
            out.push((p, q == p + g.nx));
        }
    });
    out
}

fn restrict(u: &VectorField, edges: &[(usize, bool)]) -> Vec<f64> {
    edges.iter().map(|&(k, x)| if x { u.ux[k] } else { u.uy[k] }).collect()
}

fn l2_gap(a: &[f64], b: &[f64], h: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() * h
}

fn grid_for(spec: &DomainSpec, family: &Family, res: usize, warnings: &mut Vec<Warning>) -> Result<MaskedGrid> {
    let out = discretize_with_box(spec, &family.confining_box(), res)?;
    warnings.extend(out.warnings);
    Ok(out.value)
}

/// Runs the limit domain and every member with the same initial data, circulations and
/// time steps, and reports `sup_t ‖u_n(t) − u(t)‖_{L²(K)}` per member.
pub fn domain_continuity_study(cfg: &ContinuityConfig) -> Result<Outcome<StudyReport>> {
    if cfg.members.len() < 2 || cfg.members.contains(&0) {
        return Err(Error::Invalid("need at least two members with n ≥ 1".into()));
    }
    if !(cfg.t_final > 0.0 && cfg.probe_margin >= 0.0) {
        return Err(Error::Invalid("need t_final > 0 and a non-negative probe margin".into()));
    }
    let family = Family::parse(&cfg.family, cfg.alpha)?;
    let opts = SolveOptions::default();
    let mut warnings = Vec::new();
    let lim_grid = grid_for(&family.limit(), &family, cfg.resolution, &mut warnings)?;
    let grids: Vec<MaskedGrid> =
        cfg.members.iter().map(|&n| grid_for(&family.member(n), &family, cfg.resolution, &mut warnings)).collect::<Result<_>>()?;
    let bound = family.component_bound();
    let max_c = grids.iter().map(|g| g.complement_components()).max().unwrap_or(0);
    if max_c > bound {
        warnings.push(Warning::SverakViolated { max_components: max_c, bound });
    }
    let h = lim_grid.h;
    let mut all: Vec<&MaskedGrid> = grids.iter().collect();
    all.push(&lim_grid);
    let kmask = probe_compact(&all, cfg.probe_margin * h)?;
    let edges = probe_edges(&lim_grid, &kmask);
    if edges.is_empty() {
        return Err(Error::Invalid("probe compact is empty".into()));
    }
    let gamma = if cfg.gamma.is_empty() { vec![0.0; lim_grid.obstacles] } else { cfg.gamma.clone() };
    let start = |g: &MaskedGrid| -> Result<GridSim> {
        let basis = HodgeBasis::build(g, &opts)?;
        let w0 = g.sample_fluid(|p| cfg.initial.eval(p));
        let gm = if g.obstacles == gamma.len() { gamma.clone() } else { vec![0.0; g.obstacles] };
        GridSim::new(g.clone(), basis, &w0, &gm, opts, cfg.interpolation)
    };

    let mut lim = start(&lim_grid)?;
    let dt0 = cfg.dt.unwrap_or_else(|| lim.default_dt());
    let steps = (cfg.t_final / dt0).ceil().max(1.0) as usize;
    let dt = cfg.t_final / steps as f64;
    let mut reference = vec![restrict(&lim.state.u, &edges)];
    for _ in 0..steps {
        lim.step(dt)?;
        reference.push(restrict(&lim.state.u, &edges));
    }

    let per_member: Vec<(f64, f64, usize)> = grids
        .par_iter()
        .map(|g| {
            let mut sim = start(g)?;
            let mut gap0 = l2_gap(&restrict(&sim.state.u, &edges), &reference[0], h);
            let first = gap0;
            let mut clamped = 0;
            for r in &reference[1..] {
                clamped += sim.step(dt)?;
                gap0 = gap0.max(l2_gap(&restrict(&sim.state.u, &edges), r, h));
            }
            Ok((gap0, first, clamped))
        })
        .collect::<Result<_>>()?;

    let params = serde_json::json!({
        "family": family, "members": cfg.members, "resolution": cfg.resolution, "h": h,
        "t_final": cfg.t_final, "dt": dt, "steps": steps, "probe_margin_h": cfg.probe_margin,
        "probe_nodes": kmask.iter().filter(|b| **b).count(), "initial": cfg.initial, "gamma": gamma,
    });
    let mut report = StudyReport::new("domain_continuity", params, &["n", "sup_gap", "gap_t0", "clamped"]);
    for (&n, &(sup, first, c)) in cfg.members.iter().zip(&per_member) {
        report.push_row(vec![n as f64, sup, first, c as f64])?;
    }
    let gaps: Vec<f64> = per_member.iter().map(|m| m.0).collect();
    report.checks.push(Check::flag("sup gaps strictly decreasing", strictly_decreasing(&gaps)));
    let ratio = gaps[gaps.len() - 1] / gaps[0];
    report.checks.push(Check::at_most("final/initial sup gap", ratio, cfg.final_ratio));
    report.warnings = warnings.clone();
    Ok(Outcome::with_warnings(report, warnings))
}
