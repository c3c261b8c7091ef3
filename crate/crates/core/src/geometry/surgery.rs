use super::sets::{is_simple, ring_segments};
use super::{polygon_area, CompactSet, DomainKind, DomainSpec, Piece, Point};
use crate::{Error, Result};

/// Number of connected components of the complement of `Ω` in the box, counted
/// on the grid at `resolution` (solid nodes, 8-connected).
pub fn complement_components(spec: &DomainSpec, resolution: usize) -> Result<usize> {
    let grid = crate::elliptic::discretize(spec, resolution)?;
    Ok(grid.value.complement_components())
}

/// Removes one hole from a polygonal domain by cutting a straight channel of
/// width `eps/2` from the outer boundary to the nearest hole.
///
/// The result has one complement component fewer and its closure lies within
/// Hausdorff distance `eps/4` of the closure of the input. A domain without
/// holes is returned unchanged.
pub fn simply_connectify(spec: &DomainSpec, eps: f64) -> Result<DomainSpec> {
    let outer = match &spec.kind {
        DomainKind::Bounded { outer } => outer.clone(),
        DomainKind::Exterior => return Err(Error::Invalid("channel cut needs a bounded domain".into())),
    };
    if spec.obstacles.is_empty() {
        return Ok(spec.clone());
    }
    if !(eps > 0.0) {
        return Err(Error::Invalid("channel width must be positive".into()));
    }
    let mut holes = Vec::with_capacity(spec.obstacles.len());
    for c in &spec.obstacles {
        match c.pieces.as_slice() {
            [Piece::Polygon { vertices }] => holes.push(vertices.clone()),
            _ => return Err(Error::Invalid("channel cut needs single-polygon obstacles".into())),
        }
    }
    let mut outer = outer;
    if polygon_area(&outer) < 0.0 {
        outer.reverse();
    }

    // nearest hole to the outer ring; ties go to the lowest index
    let mut best = (f64::INFINITY, 0usize, Point::default(), Point::default());
    for (i, h) in holes.iter().enumerate() {
        let (d, a, b) = closest_pair(h, &outer);
        if d < best.0 {
            best = (d, i, a, b);
        }
    }
    let (gap, idx, a, b) = best;
    let hole = &holes[idx];
    let dir = (b - a) * (1.0 / gap);
    let nrm = dir.perp();
    let half = eps / 4.0;

    let mut o_hits = [(0.0, Point::default()); 2];
    let mut h_hits = [(0.0, Point::default()); 2];
    for (k, s) in [1.0, -1.0].into_iter().enumerate() {
        let origin = a + nrm * (s * half);
        o_hits[k] = line_hit(&outer, origin, dir, gap)
            .ok_or_else(|| Error::Invalid("channel misses the outer boundary".into()))?;
        h_hits[k] = line_hit(hole, origin, dir, 0.0)
            .ok_or_else(|| Error::Invalid("channel misses the hole boundary".into()))?;
    }
    let pos_b = ring_position(&outer, b);
    let pos_a = ring_position(hole, a);
    let n_o = outer.len() as f64;
    let n_h = hole.len() as f64;

    // long arc of the outer ring, walked forward
    let (start, end) = if forward_between(o_hits[0].0, o_hits[1].0, pos_b, n_o) {
        (1, 0)
    } else {
        (0, 1)
    };
    let mut ring = vec![o_hits[start].1];
    ring.extend(walk(&outer, o_hits[start].0, o_hits[end].0, true));
    ring.push(o_hits[end].1);
    ring.push(h_hits[end].1);
    let forward = !forward_between(h_hits[end].0, h_hits[start].0, pos_a, n_h);
    ring.extend(walk(hole, h_hits[end].0, h_hits[start].0, forward));
    ring.push(h_hits[start].1);
    ring.dedup_by(|p, q| p.dist(*q) < 1e-14);

    if !is_simple(&ring, true) {
        return Err(Error::Invalid("channel cut produced a self-intersecting boundary".into()));
    }
    let obstacles: Vec<CompactSet> = spec
        .obstacles
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != idx)
        .map(|(_, c)| c.clone())
        .collect();
    Ok(DomainSpec::bounded(ring, obstacles, spec.confining_box))
}

fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let d = b - a;
    let l2 = d.norm_sq();
    if l2 == 0.0 {
        return a;
    }
    a + d * ((p - a).dot(d) / l2).clamp(0.0, 1.0)
}

// closest points between two disjoint closed rings: (distance, on first, on second)
fn closest_pair(r1: &[Point], r2: &[Point]) -> (f64, Point, Point) {
    let mut best = (f64::INFINITY, r1[0], r2[0]);
    let s1 = ring_segments(r1, true);
    let s2 = ring_segments(r2, true);
    for &(p, q) in &s1 {
        for &(r, s) in &s2 {
            for (x, y) in [
                (p, closest_on_segment(p, r, s)),
                (q, closest_on_segment(q, r, s)),
                (closest_on_segment(r, p, q), r),
                (closest_on_segment(s, p, q), s),
            ] {
                let d = x.dist(y);
                if d < best.0 {
                    best = (d, x, y);
                }
            }
        }
    }
    best
}

// first crossing of the line origin + t·dir with the ring, t nearest to `t_ref`
fn line_hit(ring: &[Point], origin: Point, dir: Point, t_ref: f64) -> Option<(f64, Point)> {
    let mut best: Option<(f64, f64, Point)> = None;
    let n = ring.len();
    for i in 0..n {
        let (p, q) = (ring[i], ring[(i + 1) % n]);
        let e = q - p;
        let den = dir.cross(e);
        if den == 0.0 {
            continue;
        }
        let w = p - origin;
        let t = w.cross(e) / den;
        let u = w.cross(dir) / den;
        if (0.0..=1.0).contains(&u) {
            let score = (t - t_ref).abs();
            if best.map_or(true, |b| score < b.0) {
                best = Some((score, i as f64 + u.min(1.0 - 1e-12), origin + dir * t));
            }
        }
    }
    best.map(|(_, s, pt)| (s, pt))
}

fn ring_position(ring: &[Point], x: Point) -> f64 {
    let n = ring.len();
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let (p, q) = (ring[i], ring[(i + 1) % n]);
        let c = closest_on_segment(x, p, q);
        let d = c.dist(x);
        if d < best.0 {
            let l = p.dist(q);
            let u = if l > 0.0 { p.dist(c) / l } else { 0.0 };
            best = (d, i as f64 + u.min(1.0 - 1e-12));
        }
    }
    best.1
}

fn fwd(from: f64, to: f64, n: f64) -> f64 {
    (to - from).rem_euclid(n)
}

// whether walking forward from `s0` passes `x` before reaching `s1`
fn forward_between(s0: f64, s1: f64, x: f64, n: f64) -> bool {
    fwd(s0, x, n) < fwd(s0, s1, n)
}

// ring vertices strictly between ring positions s0 and s1 in walking order
fn walk(ring: &[Point], s0: f64, s1: f64, forward: bool) -> Vec<Point> {
    let n = ring.len() as f64;
    let span = if forward { fwd(s0, s1, n) } else { fwd(s1, s0, n) };
    let mut picked: Vec<(f64, Point)> = ring
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| {
            let d = if forward { fwd(s0, k as f64, n) } else { fwd(k as f64, s0, n) };
            (d > 0.0 && d < span).then_some((d, p))
        })
        .collect();
    picked.sort_by(|x, y| x.0.total_cmp(&y.0));
    picked.into_iter().map(|(_, p)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sets::circle_points;
    use crate::geometry::BoxRegion;

    fn annulus() -> DomainSpec {
        DomainSpec::bounded(
            circle_points(Point::default(), 1.0, 96),
            vec![CompactSet::disk(Point::new(0.1, 0.0), 0.4, 48)],
            BoxRegion::square(1.0),
        )
    }

    #[test]
    fn annulus_becomes_slit() {
        let d = annulus();
        let cut = simply_connectify(&d, 0.05).unwrap();
        cut.validate().unwrap();
        assert!(cut.obstacles.is_empty());
        // channel runs toward +x, where the hole is closest to the outer circle
        assert!(!cut.is_fluid(Point::new(0.75, 0.0)));
        assert!(cut.is_fluid(Point::new(0.75, 0.05)));
        assert!(cut.is_fluid(Point::new(-0.6, 0.0)));
        assert!(!cut.is_fluid(Point::new(0.1, 0.0)));
    }

    #[test]
    fn no_holes_is_identity() {
        let d = DomainSpec::bounded(circle_points(Point::default(), 1.0, 32), vec![], BoxRegion::square(1.0));
        assert_eq!(simply_connectify(&d, 0.1).unwrap(), d);
    }

    #[test]
    fn exterior_rejected() {
        let d = DomainSpec::exterior(vec![CompactSet::disk(Point::default(), 0.2, 16)], BoxRegion::square(1.0));
        assert!(simply_connectify(&d, 0.1).is_err());
    }
}
