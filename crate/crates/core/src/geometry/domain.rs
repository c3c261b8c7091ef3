use serde::{Deserialize, Serialize};

use super::sets::{bounding_box, chain_samples, is_simple, point_in_polygon, ring_distance, SampledSet};
use super::{polygon_area, BoxRegion, CompactSet, Point, Sampling};
use crate::{Error, Result};

/// Bounded domains carry an outer simple polygon; exterior domains extend to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainKind {
    Bounded { outer: Vec<Point> },
    Exterior,
}

/// `Ω = Ω̃ ∖ ∪ Cⁱ` (bounded) or `ℝ² ∖ ∪ Cⁱ` (exterior), confined to a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    #[serde(default)]
    pub obstacles: Vec<CompactSet>,
    #[serde(rename = "box")]
    pub confining_box: BoxRegion,
}

impl DomainSpec {
    pub fn bounded(outer: Vec<Point>, obstacles: Vec<CompactSet>, confining_box: BoxRegion) -> Self {
        DomainSpec { kind: DomainKind::Bounded { outer }, obstacles, confining_box }
    }

    pub fn exterior(obstacles: Vec<CompactSet>, confining_box: BoxRegion) -> Self {
        DomainSpec { kind: DomainKind::Exterior, obstacles, confining_box }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.kind, DomainKind::Bounded { .. })
    }

    pub fn outer(&self) -> Option<&[Point]> {
        match &self.kind {
            DomainKind::Bounded { outer } => Some(outer),
            DomainKind::Exterior => None,
        }
    }

    pub fn obstacle_count(&self) -> usize {
        self.obstacles.len()
    }

    /// Checks simplicity, containment and pairwise disjointness.
    pub fn validate(&self) -> Result<()> {
        if !self.confining_box.is_valid() {
            return Err(Error::Invalid("confining box is degenerate".into()));
        }
        for c in &self.obstacles {
            c.validate()?;
        }
        if let Some(outer) = self.outer() {
            if outer.len() < 3 || polygon_area(outer) == 0.0 {
                return Err(Error::Invalid("outer boundary must be a polygon".into()));
            }
            if !is_simple(outer, true) {
                return Err(Error::Invalid("outer boundary self-intersects".into()));
            }
            if !self.confining_box.expanded(1e-12).contains_box(&bounding_box(outer)) {
                return Err(Error::NotContained("outer boundary leaves the confining box".into()));
            }
            let ring = CompactSet::polyline(outer.to_vec());
            for (i, c) in self.obstacles.iter().enumerate() {
                let inside = c
                    .pieces
                    .iter()
                    .all(|p| p.vertices().iter().all(|&v| point_in_polygon(v, outer)));
                if !inside || c.gap(&ring) == 0.0 {
                    return Err(Error::NotContained(format!(
                        "obstacle {i} is not strictly inside the outer boundary"
                    )));
                }
            }
        }
        for (i, c) in self.obstacles.iter().enumerate() {
            if !self.confining_box.contains_box(&c.bbox()) {
                return Err(Error::NotContained(format!("obstacle {i} leaves the confining box")));
            }
            for (j, d) in self.obstacles.iter().enumerate().skip(i + 1) {
                if c.gap(d) == 0.0 {
                    return Err(Error::Invalid(format!("obstacles {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }

    /// Index of the obstacle containing `p`, if any.
    pub fn obstacle_at(&self, p: Point) -> Option<usize> {
        self.obstacles.iter().position(|c| c.contains(p, 0.0))
    }

    /// Whether `p` lies in the open fluid region (inside the box).
    pub fn is_fluid(&self, p: Point) -> bool {
        if !self.confining_box.contains(p) {
            return false;
        }
        if let Some(outer) = self.outer() {
            if !point_in_polygon(p, outer) {
                return false;
            }
        }
        self.obstacle_at(p).is_none()
    }

    /// Closed complement `B ∖ Ω` as a sampled set.
    pub fn complement_in(&self, b: &BoxRegion) -> ComplementSet<'_> {
        ComplementSet { domain: self, bx: *b }
    }
}

/// `B ∖ Ω`: obstacles, the part of `B` outside the outer polygon, and `∂B`.
#[derive(Debug, Clone, Copy)]
pub struct ComplementSet<'a> {
    domain: &'a DomainSpec,
    bx: BoxRegion,
}

impl SampledSet for ComplementSet<'_> {
    fn distance(&self, p: Point) -> f64 {
        let mut d = self.bx.boundary_distance(p);
        if !self.bx.contains(p) {
            d = 0.0;
        }
        if let Some(outer) = self.domain.outer() {
            if !point_in_polygon(p, outer) {
                return 0.0;
            }
            d = d.min(ring_distance(p, outer, true));
        }
        self.domain.obstacles.iter().fold(d, |acc, c| acc.min(c.distance(p)))
    }

    fn samples(&self, sampling: &Sampling) -> Vec<Point> {
        let mut out = chain_samples(&self.bx.corners(), true, sampling.boundary);
        if let Some(outer) = self.domain.outer() {
            out.extend(chain_samples(outer, true, sampling.boundary));
            let s = sampling.interior;
            let nx = (self.bx.width() / s).floor() as usize;
            let ny = (self.bx.height() / s).floor() as usize;
            for j in 0..ny {
                for i in 0..nx {
                    let q = Point::new(
                        self.bx.min.x + (i as f64 + 0.5) * s,
                        self.bx.min.y + (j as f64 + 0.5) * s,
                    );
                    if !point_in_polygon(q, outer) {
                        out.push(q);
                    }
                }
            }
        }
        for c in &self.domain.obstacles {
            out.extend(c.samples(sampling));
        }
        out
    }
}
