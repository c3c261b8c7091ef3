use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BoxRegion, Point, Sampling};
use crate::{Error, Result};

/// One connected piece of an obstacle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Piece {
    /// Closed filled polygon; the ring is implicitly closed.
    Polygon { vertices: Vec<Point> },
    /// Open chain of segments (zero area).
    Polyline { vertices: Vec<Point> },
    /// Isolated point.
    Point { at: Point },
}

impl Piece {
    pub fn vertices(&self) -> &[Point] {
        match self {
            Piece::Polygon { vertices } | Piece::Polyline { vertices } => vertices,
            Piece::Point { at } => std::slice::from_ref(at),
        }
    }

    /// Whether `p` belongs to the closed piece (boundary within `tol`).
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Euclidean distance from `p` to the piece (0 inside a polygon).
    pub fn distance(&self, p: Point) -> f64 {
        match self {
            Piece::Polygon { vertices } => {
                if point_in_polygon(p, vertices) {
                    0.0
                } else {
                    ring_distance(p, vertices, true)
                }
            }
            Piece::Polyline { vertices } => ring_distance(p, vertices, false),
            Piece::Point { at } => p.dist(*at),
        }
    }

    /// Boundary samples at spacing `ds`; polygons also get interior lattice points.
    pub fn samples(&self, sampling: &Sampling) -> Vec<Point> {
        match self {
            Piece::Polygon { vertices } => {
                let mut out = chain_samples(vertices, true, sampling.boundary);
                let bb = bounding_box(vertices);
                let s = sampling.interior;
                let nx = (bb.width() / s).floor() as usize;
                let ny = (bb.height() / s).floor() as usize;
                for j in 0..ny {
                    for i in 0..nx {
                        let q = Point::new(
                            bb.min.x + (i as f64 + 0.5) * s,
                            bb.min.y + (j as f64 + 0.5) * s,
                        );
                        if point_in_polygon(q, vertices) {
                            out.push(q);
                        }
                    }
                }
                out
            }
            Piece::Polyline { vertices } => chain_samples(vertices, false, sampling.boundary),
            Piece::Point { at } => vec![*at],
        }
    }

    /// Segments of the piece's boundary (closing edge included for polygons).
    pub fn segments(&self) -> Vec<(Point, Point)> {
        match self {
            Piece::Polygon { vertices } => ring_segments(vertices, true),
            Piece::Polyline { vertices } => ring_segments(vertices, false),
            Piece::Point { .. } => Vec::new(),
        }
    }

    pub fn bbox(&self) -> BoxRegion {
        bounding_box(self.vertices())
    }

    /// `2·area/perimeter` for polygons; 0 for polylines and points.
    pub fn thickness(&self) -> f64 {
        match self {
            Piece::Polygon { vertices } => {
                let per = polygon_perimeter(vertices);
                if per > 0.0 {
                    2.0 * polygon_area(vertices).abs() / per
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = self.vertices();
        if v.iter().any(|p| !p.is_finite()) {
            return Err(Error::Invalid("non-finite vertex".into()));
        }
        match self {
            Piece::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::Invalid("polygon needs at least 3 vertices".into()));
                }
                if polygon_area(vertices).abs() == 0.0 {
                    return Err(Error::Invalid("degenerate polygon".into()));
                }
                if !is_simple(vertices, true) {
                    return Err(Error::Invalid("self-intersecting polygon".into()));
                }
            }
            Piece::Polyline { vertices } => {
                if vertices.len() < 2 {
                    return Err(Error::Invalid("polyline needs at least 2 vertices".into()));
                }
            }
            Piece::Point { .. } => {}
        }
        Ok(())
    }
}

/// A compact subset of the plane made of polygons, polylines and points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactSet {
    pub pieces: Vec<Piece>,
}

impl CompactSet {
    /// Builds a set, checking non-emptiness, simplicity and disjointness of pieces.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let set = CompactSet { pieces };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::EmptySet);
        }
        for p in &self.pieces {
            p.validate()?;
        }
        for (i, a) in self.pieces.iter().enumerate() {
            for b in &self.pieces[i + 1..] {
                if pieces_touch(a, b) {
                    return Err(Error::Invalid("pieces of one obstacle intersect".into()));
                }
            }
        }
        Ok(())
    }

    pub fn polygon(vertices: Vec<Point>) -> Self {
        CompactSet { pieces: vec![Piece::Polygon { vertices }] }
    }

    pub fn polyline(vertices: Vec<Point>) -> Self {
        CompactSet { pieces: vec![Piece::Polyline { vertices }] }
    }

    pub fn point(at: Point) -> Self {
        CompactSet { pieces: vec![Piece::Point { at }] }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        Self::polyline(vec![a, b])
    }

    /// Regular `n`-gon inscribed in the circle of radius `r`, counterclockwise.
    pub fn disk(center: Point, r: f64, n: usize) -> Self {
        Self::polygon(circle_points(center, r, n))
    }

    pub fn rectangle(min: Point, max: Point) -> Self {
        Self::polygon(BoxRegion::new(min, max).corners().to_vec())
    }

    /// Closed boundary of the rectangle as a polyline.
    pub fn rectangle_boundary(min: Point, max: Point) -> Self {
        let mut c = BoxRegion::new(min, max).corners().to_vec();
        c.push(c[0]);
        Self::polyline(c)
    }

    /// Circle of radius `r` as a closed polyline with `n` segments.
    pub fn circle(center: Point, r: f64, n: usize) -> Self {
        let mut v = circle_points(center, r, n);
        v.push(v[0]);
        Self::polyline(v)
    }

    /// Circular arc of radius `r` between angles `a0 < a1`, `n` segments.
    pub fn arc(center: Point, r: f64, a0: f64, a1: f64, n: usize) -> Self {
        Self::polyline(arc_points(center, r, a0, a1, n))
    }

    /// Annular sector `r_in ≤ |x − c| ≤ r_out`, `a0 ≤ θ ≤ a1`.
    pub fn annular_sector(center: Point, r_in: f64, r_out: f64, a0: f64, a1: f64, n: usize) -> Self {
        let mut v = arc_points(center, r_out, a0, a1, n);
        let mut inner = arc_points(center, r_in, a0, a1, n);
        inner.reverse();
        v.extend(inner);
        Self::polygon(v)
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.pieces.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.pieces.iter().any(|q| q.contains(p, tol))
    }

    pub fn samples(&self, sampling: &Sampling) -> Vec<Point> {
        self.pieces.iter().flat_map(|q| q.samples(sampling)).collect()
    }

    pub fn bbox(&self) -> BoxRegion {
        let all: Vec<Point> = self.pieces.iter().flat_map(|p| p.vertices().iter().copied()).collect();
        bounding_box(&all)
    }

    pub fn translated(&self, d: Point) -> Self {
        let shift = |v: &[Point]| v.iter().map(|&p| p + d).collect::<Vec<_>>();
        CompactSet {
            pieces: self
                .pieces
                .iter()
                .map(|p| match p {
                    Piece::Polygon { vertices } => Piece::Polygon { vertices: shift(vertices) },
                    Piece::Polyline { vertices } => Piece::Polyline { vertices: shift(vertices) },
                    Piece::Point { at } => Piece::Point { at: *at + d },
                })
                .collect(),
        }
    }

    /// Minimum distance between two compact sets, `0` if they meet.
    pub fn gap(&self, other: &CompactSet) -> f64 {
        let mut best = f64::INFINITY;
        for a in &self.pieces {
            for b in &other.pieces {
                best = best.min(piece_gap(a, b));
            }
        }
        best
    }
}

impl SampledSet for CompactSet {
    fn distance(&self, p: Point) -> f64 {
        CompactSet::distance(self, p)
    }
    fn samples(&self, sampling: &Sampling) -> Vec<Point> {
        CompactSet::samples(self, sampling)
    }
}

/// A set known through exact point distances and a finite sample.
pub trait SampledSet {
    fn distance(&self, p: Point) -> f64;
    fn samples(&self, sampling: &Sampling) -> Vec<Point>;
}

pub(crate) fn circle_points(center: Point, r: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            center + Point::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

pub(crate) fn arc_points(center: Point, r: f64, a0: f64, a1: f64, n: usize) -> Vec<Point> {
    (0..=n)
        .map(|k| {
            let t = a0 + (a1 - a0) * k as f64 / n as f64;
            center + Point::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

pub(crate) fn bounding_box(v: &[Point]) -> BoxRegion {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in v {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    BoxRegion::new(min, max)
}

pub(crate) fn ring_segments(v: &[Point], closed: bool) -> Vec<(Point, Point)> {
    let n = v.len();
    let m = if closed { n } else { n.saturating_sub(1) };
    (0..m).map(|i| (v[i], v[(i + 1) % n])).collect()
}

/// Evenly spaced points along a chain, spacing at most `ds`.
pub(crate) fn chain_samples(v: &[Point], closed: bool, ds: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for (a, b) in ring_segments(v, closed) {
        let m = ((a.dist(b) / ds).ceil() as usize).max(1);
        for k in 0..m {
            out.push(a + (b - a) * (k as f64 / m as f64));
        }
    }
    if !closed {
        if let Some(&last) = v.last() {
            out.push(last);
        }
    }
    out
}

pub(crate) fn ring_distance(p: Point, v: &[Point], closed: bool) -> f64 {
    if v.len() == 1 {
        return p.dist(v[0]);
    }
    let n = v.len();
    let m = if closed { n } else { n - 1 };
    let mut best = f64::INFINITY;
    for i in 0..m {
        best = best.min(segment_distance(p, v[i], v[(i + 1) % n]));
    }
    best
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let l2 = d.norm_sq();
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// Even-odd point-in-polygon test; boundary points may go either way.
pub fn point_in_polygon(p: Point, v: &[Point]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Signed shoelace area (positive for counterclockwise rings).
pub fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

pub fn polygon_perimeter(v: &[Point]) -> f64 {
    ring_segments(v, true).iter().map(|(a, b)| a.dist(*b)).sum()
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    segment_distance(a, c, d)
        .min(segment_distance(b, c, d))
        .min(segment_distance(c, a, b))
        .min(segment_distance(d, a, b))
}

/// No two non-adjacent edges meet.
pub(crate) fn is_simple(v: &[Point], closed: bool) -> bool {
    let segs = ring_segments(v, closed);
    let m = segs.len();
    let boxes: Vec<BoxRegion> = segs.iter().map(|(a, b)| bounding_box(&[*a, *b])).collect();
    for i in 0..m {
        for j in i + 1..m {
            let adjacent = j == i + 1 || (closed && i == 0 && j == m - 1);
            if adjacent {
                continue;
            }
            let (bi, bj) = (&boxes[i], &boxes[j]);
            if bi.max.x < bj.min.x || bj.max.x < bi.min.x || bi.max.y < bj.min.y || bj.max.y < bi.min.y {
                continue;
            }
            if segments_intersect(segs[i].0, segs[i].1, segs[j].0, segs[j].1) {
                return false;
            }
        }
    }
    true
}

fn piece_gap(a: &Piece, b: &Piece) -> f64 {
    let mut best = f64::INFINITY;
    // containment of one vertex inside the other polygon means overlap
    if let Piece::Polygon { vertices } = a {
        if b.vertices().iter().any(|&p| point_in_polygon(p, vertices)) {
            return 0.0;
        }
    }
    if let Piece::Polygon { vertices } = b {
        if a.vertices().iter().any(|&p| point_in_polygon(p, vertices)) {
            return 0.0;
        }
    }
    let sa = a.segments();
    let sb = b.segments();
    match (sa.is_empty(), sb.is_empty()) {
        (true, true) => return a.vertices()[0].dist(b.vertices()[0]),
        (true, false) => return b.distance(a.vertices()[0]),
        (false, true) => return a.distance(b.vertices()[0]),
        _ => {}
    }
    for &(p, q) in &sa {
        for &(r, s) in &sb {
            best = best.min(segment_segment_distance(p, q, r, s));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

fn pieces_touch(a: &Piece, b: &Piece) -> bool {
    piece_gap(a, b) == 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_area_and_perimeter() {
        let sq = BoxRegion::square(1.0).corners().to_vec();
        assert_eq!(polygon_area(&sq), 4.0);
        assert_eq!(polygon_perimeter(&sq), 8.0);
        assert!(point_in_polygon(Point::new(0.2, -0.3), &sq));
        assert!(!point_in_polygon(Point::new(1.2, 0.0), &sq));
    }

    #[test]
    fn distances() {
        let seg = CompactSet::segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(seg.distance(Point::new(0.5, 2.0)), 2.0);
        assert_eq!(seg.distance(Point::new(-3.0, 4.0)), 5.0);
        let d = CompactSet::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert_eq!(d.distance(Point::new(0.5, 0.5)), 0.0);
        assert_eq!(d.distance(Point::new(2.0, 0.5)), 1.0);
    }

    #[test]
    fn validation() {
        assert!(matches!(CompactSet::new(vec![]), Err(Error::EmptySet)));
        let bow = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(CompactSet::new(vec![Piece::Polygon { vertices: bow }]).is_err());
        let a = Piece::Point { at: Point::new(0.5, 0.0) };
        let b = Piece::Polyline { vertices: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)] };
        assert!(CompactSet::new(vec![a.clone(), b]).is_err());
        let c = Piece::Point { at: Point::new(0.5, 1.0) };
        assert!(CompactSet::new(vec![a, c]).is_ok());
    }

    #[test]
    fn thickness_of_thin_rectangle() {
        let r = CompactSet::rectangle(Point::new(-0.5, -0.01), Point::new(0.5, 0.01));
        let t = r.pieces[0].thickness();
        // 2 * 0.02 / 2.04
        assert!((t - 0.04 / 2.04).abs() < 1e-14);
    }

    #[test]
    fn sector_is_simple() {
        let s = CompactSet::annular_sector(Point::default(), 0.3, 0.7, -2.0, 2.0, 64);
        s.validate().unwrap();
        assert!(s.contains(Point::new(0.5, 0.0), 0.0));
        assert!(!s.contains(Point::new(0.0, 0.0), 0.0));
    }

    #[test]
    fn serde_shape() {
        let s = CompactSet::point(Point::new(1.0, 2.0));
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"pieces":[{"type":"point","at":[1.0,2.0]}]}"#);
        let back: CompactSet = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
