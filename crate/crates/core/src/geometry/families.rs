use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sets::{arc_points, circle_points};
use super::{hausdorff_open, BoxRegion, CompactSet, DomainSpec, Point, Sampling};
use crate::{Error, Result};

/// Generators of approximating domain sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// Channel over the wall `y = εᵅ cos(x/ε)`, `ε = 1/n`; limit is the flat wall.
    Rugosity { alpha: f64 },
    /// Segment of length 1 thickened to width `2⁻ⁿ`.
    ShrinkSegment,
    /// Disk of radius `2⁻ⁿ`; limit is a single point.
    ShrinkPoint,
    /// Open circular arc thickened to an annular sector of width `0.4·2^{1−n}`.
    ThickenArc,
    /// C-shaped ring with gap `0.5/n`; limit is the closed circle.
    ClosingArc,
    /// Square offset outward by `0.25·2⁻ⁿ` with rounded corners.
    JordanApprox,
}

impl Family {
    /// Parses `rugosity`, `rugosity:2`, `shrink_segment`, ...
    pub fn parse(id: &str, alpha: Option<f64>) -> Result<Family> {
        let (name, param) = match id.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (id, None),
        };
        let name = name.replace('-', "_");
        Ok(match name.as_str() {
            "rugosity" => {
                let alpha = match param {
                    Some(p) => p.parse().map_err(|_| Error::UnknownFamily(id.to_string()))?,
                    None => alpha.unwrap_or(2.0),
                };
                Family::Rugosity { alpha }
            }
            "shrink_segment" => Family::ShrinkSegment,
            "shrink_point" => Family::ShrinkPoint,
            "thicken_arc" => Family::ThickenArc,
            "closing_arc" => Family::ClosingArc,
            "jordan_approx" => Family::JordanApprox,
            _ => return Err(Error::UnknownFamily(id.to_string())),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Family::Rugosity { .. } => "rugosity",
            Family::ShrinkSegment => "shrink_segment",
            Family::ShrinkPoint => "shrink_point",
            Family::ThickenArc => "thicken_arc",
            Family::ClosingArc => "closing_arc",
            Family::JordanApprox => "jordan_approx",
        }
    }

    pub fn confining_box(&self) -> BoxRegion {
        match self {
            Family::Rugosity { .. } => BoxRegion::new(Point::new(-PI, -0.3), Point::new(PI, 2.0)),
            _ => BoxRegion::square(1.0),
        }
    }

    /// Member `n ≥ 1` of the sequence.
    pub fn member(&self, n: usize) -> DomainSpec {
        let n = n.max(1);
        let nf = n as f64;
        let half = 0.5f64.powi(n as i32);
        match *self {
            Family::Rugosity { alpha } => rugosity_domain(Some((1.0 / nf, alpha))),
            Family::ShrinkSegment => disk_with(CompactSet::rectangle(
                Point::new(-0.5, -half / 2.0),
                Point::new(0.5, half / 2.0),
            )),
            Family::ShrinkPoint => disk_with(CompactSet::disk(Point::default(), half, 64)),
            Family::ThickenArc => {
                let w = 0.4 * 0.5f64.powi(n as i32 - 1);
                disk_with(CompactSet::annular_sector(
                    Point::default(),
                    ARC_RADIUS - w / 2.0,
                    ARC_RADIUS + w / 2.0,
                    -ARC_HALF_ANGLE,
                    ARC_HALF_ANGLE,
                    192,
                ))
            }
            Family::ClosingArc => {
                let t = 0.1 / nf;
                let gap_angle = (0.5 / nf) / ARC_RADIUS;
                let a = PI - gap_angle / 2.0;
                disk_with(CompactSet::annular_sector(
                    Point::default(),
                    ARC_RADIUS - t / 2.0,
                    ARC_RADIUS + t / 2.0,
                    -a,
                    a,
                    256,
                ))
            }
            Family::JordanApprox => disk_with(rounded_square(0.25, 0.25 * half, 16)),
        }
    }

    /// The declared limit domain.
    pub fn limit(&self) -> DomainSpec {
        match *self {
            Family::Rugosity { .. } => rugosity_domain(None),
            Family::ShrinkSegment => {
                disk_with(CompactSet::segment(Point::new(-0.5, 0.0), Point::new(0.5, 0.0)))
            }
            Family::ShrinkPoint => disk_with(CompactSet::point(Point::default())),
            Family::ThickenArc => disk_with(CompactSet::arc(
                Point::default(),
                ARC_RADIUS,
                -ARC_HALF_ANGLE,
                ARC_HALF_ANGLE,
                192,
            )),
            Family::ClosingArc => disk_with(CompactSet::circle(Point::default(), ARC_RADIUS, 512)),
            Family::JordanApprox => {
                disk_with(CompactSet::rectangle(Point::new(-0.25, -0.25), Point::new(0.25, 0.25)))
            }
        }
    }

    /// Uniform bound on complement components declared for the family.
    pub fn component_bound(&self) -> usize {
        match self {
            Family::Rugosity { .. } => 1,
            _ => 2,
        }
    }
}

pub(crate) const ARC_RADIUS: f64 = 0.5;
pub(crate) const ARC_HALF_ANGLE: f64 = 3.0 * PI / 4.0;
const OUTER_RADIUS: f64 = 1.0;

fn disk_with(obstacle: CompactSet) -> DomainSpec {
    DomainSpec::bounded(
        circle_points(Point::default(), OUTER_RADIUS, 256),
        vec![obstacle],
        BoxRegion::square(1.0),
    )
}

/// Channel `[−π, π] × (wall, 2)`; `None` gives the flat wall `y = 0`.
fn rugosity_domain(eps_alpha: Option<(f64, f64)>) -> DomainSpec {
    let m = match eps_alpha {
        Some((eps, _)) => (64.0 / eps).max(1024.0) as usize,
        None => 1,
    };
    let mut outer: Vec<Point> = (0..=m)
        .map(|k| {
            let x = -PI + 2.0 * PI * k as f64 / m as f64;
            let y = match eps_alpha {
                Some((eps, alpha)) => eps.powf(alpha) * (x / eps).cos(),
                None => 0.0,
            };
            Point::new(x, y)
        })
        .collect();
    outer.push(Point::new(PI, 2.0));
    outer.push(Point::new(-PI, 2.0));
    DomainSpec::bounded(outer, vec![], Family::Rugosity { alpha: 0.0 }.confining_box())
}

/// Square `[−s, s]²` dilated by `r` (corners rounded with `k` segments each).
fn rounded_square(s: f64, r: f64, k: usize) -> CompactSet {
    let mut v = Vec::with_capacity(4 * (k + 1));
    let corners = [(s, -s), (s, s), (-s, s), (-s, -s)];
    for (q, &(cx, cy)) in corners.iter().enumerate() {
        let a0 = -PI / 2.0 + q as f64 * PI / 2.0;
        v.extend(arc_points(Point::new(cx, cy), r, a0, a0 + PI / 2.0, k));
    }
    CompactSet::polygon(v)
}

/// A family evaluated at `n = 1..=n_max`, with measured distances to its limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSequence {
    pub family: Family,
    pub members: Vec<DomainSpec>,
    pub limit: DomainSpec,
    /// `d_H(B ∖ Ωₙ, B ∖ Ω)` per member.
    pub hausdorff: Vec<f64>,
    /// Structural complement-component count per member.
    pub components: Vec<usize>,
    pub component_bound: usize,
}

impl DomainSequence {
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        1..=self.members.len()
    }

    /// Whether the recorded distances are non-increasing up to `tol`.
    pub fn hausdorff_non_increasing(&self, tol: f64) -> bool {
        self.hausdorff.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

fn structural_components(d: &DomainSpec) -> usize {
    1 + d.obstacles.iter().map(|c| c.pieces.len()).sum::<usize>()
}

/// Builds members `1..=n_max` of a family and measures their Hausdorff distance to the limit.
pub fn make_sequence(family: Family, n_max: usize) -> Result<DomainSequence> {
    if n_max < 2 {
        return Err(Error::Invalid("sequences need n_max ≥ 2".into()));
    }
    let bx = family.confining_box();
    let sampling = Sampling::for_box(&bx);
    let members: Vec<DomainSpec> = (1..=n_max).map(|n| family.member(n)).collect();
    let limit = family.limit();
    let hausdorff = members
        .iter()
        .map(|m| hausdorff_open(m, &limit, &bx, &sampling))
        .collect::<Result<Vec<_>>>()?;
    let components = members.iter().map(structural_components).collect();
    Ok(DomainSequence {
        family,
        members,
        limit,
        hausdorff,
        components,
        component_bound: family.component_bound(),
    })
}
