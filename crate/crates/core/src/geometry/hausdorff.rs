use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sets::SampledSet;
use super::{BoxRegion, CompactSet, DomainSpec, Point};
use crate::{Error, Result};

/// Sample spacings: along boundaries and for the interior lattice of filled regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub boundary: f64,
    pub interior: f64,
}

impl Sampling {
    pub fn new(boundary: f64, interior: f64) -> Self {
        Sampling { boundary, interior }
    }

    /// Default spacings scaled to a box: diagonal/4000 on boundaries, diagonal/400 inside.
    pub fn for_box(b: &BoxRegion) -> Self {
        let diag = b.width().hypot(b.height());
        Sampling::new(diag / 4000.0, diag / 400.0)
    }
}

/// `sup_{a ∈ samples(A)} dist(a, B)` with exact point-to-set distances.
pub fn directed_distance<A: SampledSet + Sync, B: SampledSet + Sync>(
    a: &A,
    b: &B,
    sampling: &Sampling,
) -> f64 {
    let pts: Vec<Point> = a.samples(sampling);
    pts.par_iter().map(|&p| b.distance(p)).reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between two sampled sets.
pub fn hausdorff_sets<A: SampledSet + Sync, B: SampledSet + Sync>(
    a: &A,
    b: &B,
    sampling: &Sampling,
) -> f64 {
    directed_distance(a, b, sampling).max(directed_distance(b, a, sampling))
}

/// Hausdorff distance between compact sets.
///
/// The error against the continuum value is at most half the boundary spacing
/// (plus half the interior diagonal for filled polygons).
pub fn hausdorff_compact(k1: &CompactSet, k2: &CompactSet, sampling: &Sampling) -> Result<f64> {
    if k1.pieces.is_empty() || k2.pieces.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(hausdorff_sets(k1, k2, sampling))
}

/// Hausdorff distance of the complements `B ∖ Ω₁` and `B ∖ Ω₂`.
pub fn hausdorff_open(
    d1: &DomainSpec,
    d2: &DomainSpec,
    b: &BoxRegion,
    sampling: &Sampling,
) -> Result<f64> {
    for (name, d) in [("first", d1), ("second", d2)] {
        if !contained(d, b) {
            return Err(Error::NotContained(format!("{name} domain is not inside the box")));
        }
    }
    Ok(hausdorff_sets(&d1.complement_in(b), &d2.complement_in(b), sampling))
}

fn contained(d: &DomainSpec, b: &BoxRegion) -> bool {
    let bb = b.expanded(1e-12);
    let outer_ok = d.outer().map_or(true, |o| o.iter().all(|&p| bb.contains(p)));
    outer_ok && d.obstacles.iter().all(|c| bb.contains_box(&c.bbox()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sets::circle_points;
    use proptest::prelude::*;

    fn fine() -> Sampling {
        Sampling::new(1e-3, 1e-2)
    }

    #[test]
    fn identity_is_zero() {
        let k = CompactSet::disk(Point::new(0.1, 0.2), 0.5, 40);
        assert!(hausdorff_compact(&k, &k, &fine()).unwrap() < 1e-12);
    }

    #[test]
    fn segment_and_endpoint() {
        let seg = CompactSet::segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        let pt = CompactSet::point(Point::new(0.0, 0.0));
        assert_eq!(hausdorff_compact(&seg, &pt, &fine()).unwrap(), 1.0);
        assert_eq!(directed_distance(&pt, &seg, &fine()), 0.0);
    }

    #[test]
    fn empty_is_error() {
        let e = CompactSet { pieces: vec![] };
        let pt = CompactSet::point(Point::default());
        assert!(matches!(hausdorff_compact(&e, &pt, &fine()), Err(Error::EmptySet)));
    }

    #[test]
    fn square_against_circle_brute_force() {
        let sq = CompactSet::rectangle_boundary(Point::new(-0.5, -0.5), Point::new(0.5, 0.5));
        let circ = CompactSet::circle(Point::default(), 0.5, 2000);
        let got = hausdorff_compact(&sq, &circ, &Sampling::new(1e-3, 1e-2)).unwrap();
        // independent max-min over 10⁴ samples on each curve
        let n = 10_000;
        let sqs: Vec<Point> = (0..n)
            .map(|k| {
                let s = 4.0 * k as f64 / n as f64;
                let t = s.fract() - 0.5;
                match s as usize {
                    0 => Point::new(t, -0.5),
                    1 => Point::new(0.5, t),
                    2 => Point::new(-t, 0.5),
                    _ => Point::new(-0.5, -t),
                }
            })
            .collect();
        let cs = circle_points(Point::default(), 0.5, n);
        let dmin = |p: Point, set: &[Point]| set.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min);
        let a = sqs.iter().map(|&p| dmin(p, &cs)).fold(0.0, f64::max);
        let b = cs.iter().map(|&p| dmin(p, &sqs)).fold(0.0, f64::max);
        let brute = a.max(b);
        assert!((got - brute).abs() < 1e-3, "{got} vs {brute}");
        assert!((got - (0.5 * 2f64.sqrt() - 0.5)).abs() < 1e-3);
    }

    #[test]
    fn concentric_holes() {
        let b = BoxRegion::square(1.0);
        let mk = |r: f64| DomainSpec::exterior(vec![CompactSet::disk(Point::default(), r, 720)], b);
        let s = Sampling::new(5e-4, 5e-3);
        let d = hausdorff_open(&mk(0.3), &mk(0.2), &b, &s).unwrap();
        let r_eff = 0.3 * (std::f64::consts::PI / 720.0).cos();
        assert!((d - (r_eff - 0.2)).abs() < 5e-3, "{d}");
        assert!(hausdorff_open(&mk(0.3), &mk(0.3), &b, &s).unwrap() < 1e-12);
    }

    #[test]
    fn enlarging_box_does_not_change_distance() {
        let mk = |r: f64, b: BoxRegion| {
            DomainSpec::bounded(circle_points(Point::default(), 1.0, 256), vec![CompactSet::disk(Point::default(), r, 256)], b)
        };
        let s = Sampling::new(1e-3, 1e-2);
        let b1 = BoxRegion::square(1.0);
        let b2 = BoxRegion::square(1.5);
        let d1 = hausdorff_open(&mk(0.3, b1), &mk(0.25, b1), &b1, &s).unwrap();
        let d2 = hausdorff_open(&mk(0.3, b2), &mk(0.25, b2), &b2, &s).unwrap();
        assert!((d1 - d2).abs() < 2e-3, "{d1} vs {d2}");
    }

    #[test]
    fn not_contained() {
        let b = BoxRegion::square(0.5);
        let d = DomainSpec::exterior(vec![CompactSet::disk(Point::default(), 0.9, 16)], BoxRegion::square(1.0));
        assert!(matches!(hausdorff_open(&d, &d, &b, &fine()), Err(Error::NotContained(_))));
    }

    #[test]
    fn nested_disks_converge_to_intersection() {
        let lim = CompactSet::point(Point::default());
        let s = Sampling::new(1e-3, 1e-3);
        let mut prev = f64::INFINITY;
        for n in 1..6 {
            let r = 0.5f64.powi(n);
            let d = hausdorff_compact(&CompactSet::disk(Point::default(), r, 64), &lim, &s).unwrap();
            assert!((d - r).abs() < 1e-12);
            assert!(d < prev);
            prev = d;
        }
    }

    fn arb_set() -> impl Strategy<Value = CompactSet> {
        prop_oneof![
            (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y)| CompactSet::point(Point::new(x, y))),
            (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
                .prop_map(|(a, b, c, d)| CompactSet::segment(Point::new(a, b), Point::new(c, d))),
            (-0.5..0.5f64, -0.5..0.5f64, 0.05..0.5f64)
                .prop_map(|(x, y, r)| CompactSet::disk(Point::new(x, y), r, 24)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn metric_axioms(a in arb_set(), b in arb_set(), c in arb_set()) {
            let s = Sampling::new(2e-3, 2e-2);
            let ab = hausdorff_compact(&a, &b, &s).unwrap();
            let ba = hausdorff_compact(&b, &a, &s).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            let bc = hausdorff_compact(&b, &c, &s).unwrap();
            let ac = hausdorff_compact(&a, &c, &s).unwrap();
            // sampling error is at most the interior lattice half-diagonal per term
            prop_assert!(ac <= ab + bc + 0.03);
        }
    }
}
