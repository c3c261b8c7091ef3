use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{fit_slope, strictly_decreasing, Check, StudyReport};
use crate::elliptic::{discretize, HodgeBasis, MaskedGrid, SolveOptions};
use crate::geometry::Family;
use crate::hodge::perp_grad;
use crate::{Error, Outcome, Result};

fn default_n_max() -> usize {
    8
}
fn default_min_res() -> usize {
    128
}
fn default_max_res() -> usize {
    1024
}
fn default_cells() -> f64 {
    64.0
}
fn default_probe() -> f64 {
    0.5
}

/// Positive versus zero capacity along `shrink_segment` and `shrink_point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomyConfig {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Member `n` is solved at `clamp(cells_per_unit · 2ⁿ, min_res, max_res)`.
    #[serde(default = "default_cells")]
    pub cells_per_unit: f64,
    #[serde(default = "default_min_res")]
    pub min_res: usize,
    /// Also the resolution of the fine-grid segment limit.
    #[serde(default = "default_max_res")]
    pub max_res: usize,
    /// Radius of the ball around the point in which `‖u‖_{L²}` is measured.
    #[serde(default = "default_probe")]
    pub probe_radius: f64,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        DichotomyConfig {
            n_max: default_n_max(),
            cells_per_unit: default_cells(),
            min_res: default_min_res(),
            max_res: default_max_res(),
            probe_radius: default_probe(),
        }
    }
}

impl DichotomyConfig {
    pub fn resolution(&self, n: usize) -> usize {
        let r = (self.cells_per_unit * 2f64.powi(n as i32)).round() as usize;
        r.clamp(self.min_res, self.max_res)
    }
}

/// `∫_{B(0,R) ∖ O} |u|²` of the unit-circulation field, edge quadrature.
fn local_energy(g: &MaskedGrid, basis: &HodgeBasis, radius: f64) -> Result<f64> {
    let u = perp_grad(g, &basis.psi[0])?;
    let mut s = 0.0;
    g.for_each_edge(|p, q| {
        if g.is_fluid(p) && g.is_fluid(q) && g.pos_of(p).norm() < radius && g.pos_of(q).norm() < radius {
            let v = if q == p + g.nx { u.ux[p] } else { u.uy[p] };
            s += v * v;
        }
    });
    Ok(s * g.h * g.h)
}

struct Member {
    cap: f64,
    energy: f64,
}

fn solve_member(family: Family, n: usize, res: usize, probe: f64, opts: &SolveOptions) -> Result<(Member, Vec<crate::Warning>)> {
    let out = discretize(&family.member(n), res)?;
    let g = out.value;
    let basis = HodgeBasis::build(&g, opts)?;
    // with one obstacle the Gram entry is the capacity relative to the outer boundary
    let cap = basis.p[(0, 0)];
    let energy = if family == Family::ShrinkPoint { local_energy(&g, &basis, probe)? } else { f64::NAN };
    Ok((Member { cap, energy }, out.warnings))
}

/// Capacities of both families for `n = 1..=n_max` with resolution refined along `n`,
/// the fine-grid segment capacity, and the local kinetic energy of the unit-circulation
/// field around the shrinking point against `ln(R/r_n)/2π`.
pub fn capacity_dichotomy_study(cfg: &DichotomyConfig) -> Result<Outcome<StudyReport>> {
    if cfg.n_max < 3 || cfg.min_res < 16 || cfg.max_res < cfg.min_res {
        return Err(Error::Invalid("need n_max ≥ 3 and 16 ≤ min_res ≤ max_res".into()));
    }
    let opts = SolveOptions::default();
    let ns: Vec<usize> = (1..=cfg.n_max).collect();
    let jobs: Vec<(Family, usize)> =
        ns.iter().flat_map(|&n| [(Family::ShrinkPoint, n), (Family::ShrinkSegment, n)]).collect();
    let results: Vec<(Member, Vec<crate::Warning>)> = jobs
        .par_iter()
        .map(|&(f, n)| solve_member(f, n, cfg.resolution(n), cfg.probe_radius, &opts))
        .collect::<Result<_>>()?;
    let lim = discretize(&Family::ShrinkSegment.limit(), cfg.max_res)?;
    let mut warnings: Vec<crate::Warning> = results.iter().flat_map(|r| r.1.clone()).collect();
    warnings.extend(lim.warnings);
    let seg_limit = HodgeBasis::build(&lim.value, &opts)?.p[(0, 0)];

    let mut report = StudyReport::new(
        "capacity_dichotomy",
        serde_json::json!({"config": cfg, "segment_limit_capacity": seg_limit}),
        &["n", "resolution", "radius", "point_capacity", "point_capacity_exact", "segment_capacity", "segment_rel_gap", "point_local_energy", "point_energy_exact"],
    );
    let mut pc = Vec::new();
    let mut gaps = Vec::new();
    let mut en = Vec::new();
    let mut logs = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let p = &results[2 * i].0;
        let s = &results[2 * i + 1].0;
        let r = 0.5f64.powi(n as i32);
        let rel = (s.cap - seg_limit).abs() / seg_limit;
        let exact_e = (cfg.probe_radius / r).ln() / (2.0 * PI);
        report.push_row(vec![n as f64, cfg.resolution(n) as f64, r, p.cap, 2.0 * PI / (1.0 / r).ln(), s.cap, rel, p.energy, exact_e])?;
        pc.push(p.cap);
        gaps.push(rel);
        if r < cfg.probe_radius {
            en.push(p.energy);
            logs.push((1.0 / r).ln());
        }
    }
    report.checks.push(Check::flag("point capacities strictly decreasing", strictly_decreasing(&pc)));
    let last3 = gaps[gaps.len() - 3..].iter().cloned().fold(0.0, f64::max);
    report.checks.push(Check::at_most("segment capacity gap over last three n", last3, 0.05));
    report.checks.push(Check::flag("point local energy increasing", en.windows(2).all(|w| w[1] > w[0])));
    if en.len() >= 2 {
        let slope = fit_slope(&logs, &en);
        report.checks.push(Check::within("local energy slope times 2pi", slope * 2.0 * PI, 0.8, 1.2));
    }
    report.warnings = warnings.clone();
    Ok(Outcome::with_warnings(report, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::capacity;

    #[test]
    fn gram_entry_is_capacity() {
        let g = discretize(&Family::ShrinkPoint.member(2), 64).unwrap().value;
        let opts = SolveOptions::default();
        let b = HodgeBasis::build(&g, &opts).unwrap();
        let c = capacity(&g, 0, &opts).unwrap().value;
        assert!((b.p[(0, 0)] - c).abs() <= 1e-9 * c);
    }

    #[test]
    fn resolution_policy() {
        let c = DichotomyConfig::default();
        assert_eq!(c.resolution(1), 128);
        assert_eq!(c.resolution(3), 512);
        assert_eq!(c.resolution(8), 1024);
    }

    #[test]
    fn coarse_study_is_finite() {
        let c = DichotomyConfig { n_max: 3, cells_per_unit: 16.0, min_res: 32, max_res: 64, probe_radius: 0.5 };
        let r = capacity_dichotomy_study(&c).unwrap().value;
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().flatten().all(|v| v.is_finite()));
    }
}
