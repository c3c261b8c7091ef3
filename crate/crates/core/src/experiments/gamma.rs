use serde::{Deserialize, Serialize};

use super::report::{strictly_decreasing, Check, StudyReport};
use crate::elliptic::{discretize_with_box, gamma_gap, SolveOptions};
use crate::geometry::{make_sequence, Family};
use crate::{Error, Outcome, Result};

fn default_f() -> f64 {
    1.0
}
fn default_ratio() -> f64 {
    0.25
}

/// H¹₀ gaps of Dirichlet solutions along a family, at one or more resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaConfig {
    pub family: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub n_max: usize,
    /// Constant right-hand side of `Δψ = f`.
    #[serde(default = "default_f")]
    pub f: f64,
    /// Checks use the first resolution; a second one gives the Richardson split.
    pub resolutions: Vec<usize>,
    #[serde(default = "default_ratio")]
    pub final_ratio: f64,
}

/// Wraps [`gamma_gap`] over the configured resolutions. With two resolutions
/// `r, 2r` the discretisation part of the gap at `r` is estimated by the change
/// `|gap_r − gap_2r|` and the domain part by `gap_2r`.
pub fn gamma_dirichlet_study(cfg: &GammaConfig) -> Result<Outcome<StudyReport>> {
    if cfg.resolutions.is_empty() {
        return Err(Error::Invalid("need at least one resolution".into()));
    }
    if !cfg.f.is_finite() {
        return Err(Error::Invalid("f must be finite".into()));
    }
    let family = Family::parse(&cfg.family, cfg.alpha)?;
    let seq = make_sequence(family, cfg.n_max)?;
    let opts = SolveOptions::default();
    let mut warnings = Vec::new();
    let mut per_res = Vec::new();
    for &res in &cfg.resolutions {
        let lim = discretize_with_box(&seq.limit, &seq.limit.confining_box, res)?.value;
        let f = lim.sample(|_| cfg.f);
        let out = gamma_gap(&seq, &f, res, &opts)?;
        warnings.extend(out.warnings);
        per_res.push(out.value);
    }
    let mut cols = vec!["n".to_string(), "hausdorff".to_string(), "components".to_string()];
    cols.extend(cfg.resolutions.iter().map(|r| format!("gap_{r}")));
    if per_res.len() >= 2 {
        cols.push("discretisation".into());
        cols.push("domain".into());
    }
    let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut report = StudyReport::new(
        "gamma_dirichlet",
        serde_json::json!({"config": cfg, "family": family, "h": per_res.iter().map(|g| g.h).collect::<Vec<_>>()}),
        &col_refs,
    );
    for i in 0..seq.members.len() {
        let mut row = vec![(i + 1) as f64, seq.hausdorff[i], per_res[0].components[i] as f64];
        row.extend(per_res.iter().map(|g| g.gaps[i]));
        if per_res.len() >= 2 {
            row.push((per_res[0].gaps[i] - per_res[1].gaps[i]).abs());
            row.push(per_res[1].gaps[i]);
        }
        report.push_row(row)?;
    }
    let gaps = &per_res[0].gaps;
    report.checks.push(Check::flag("gaps strictly decreasing", strictly_decreasing(gaps)));
    report.checks.push(Check::at_most("final/initial gap", gaps[gaps.len() - 1] / gaps[0], cfg.final_ratio));
    report.warnings = warnings.clone();
    Ok(Outcome::with_warnings(report, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_point_dirichlet_gaps_vanish() {
        let cfg = GammaConfig { family: "shrink_point".into(), alpha: None, n_max: 4, f: 1.0, resolutions: vec![64, 128], final_ratio: 0.25 };
        let r = gamma_dirichlet_study(&cfg).unwrap().value;
        assert_eq!(r.rows.len(), 4);
        assert!(r.all_finite());
        let g = r.column("gap_128").unwrap();
        assert!(g[3] < g[0]);
        assert!(r.column("domain").is_some());
    }
}
