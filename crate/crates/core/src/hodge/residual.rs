use serde::{Deserialize, Serialize};

use super::assemble::FlowState;
use super::ops::VectorField;
use crate::elliptic::MaskedGrid;
use crate::geometry::Point;
use crate::{Error, Result};

/// Profile of a compactly supported polynomial bump `b`; test fields are `θ(t)∇⊥b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum BumpShape {
    /// `(1 − r²/ρ²)⁴`
    Radial { radius: f64 },
    /// `(x/ρ)(1 − r²/ρ²)⁴`
    Dipole { radius: f64 },
    /// `(1 − x²/a² − y²/b²)⁴`
    Elliptic { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: Point,
    pub shape: BumpShape,
}

/// Value, gradient and Hessian `(b, b_x, b_y, b_xx, b_xy, b_yy)`.
type Jet = (f64, f64, f64, f64, f64, f64);

impl Bump {
    /// The three shipped test profiles around one centre.
    pub fn canonical(center: Point, radius: f64) -> [Bump; 3] {
        [
            Bump { center, shape: BumpShape::Radial { radius } },
            Bump { center, shape: BumpShape::Dipole { radius } },
            Bump { center, shape: BumpShape::Elliptic { a: radius, b: 0.6 * radius } },
        ]
    }

    fn half_widths(&self) -> (f64, f64) {
        match self.shape {
            BumpShape::Radial { radius } | BumpShape::Dipole { radius } => (radius, radius),
            BumpShape::Elliptic { a, b } => (a, b),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.half_widths();
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && self.center.is_finite() {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad bump {self:?}")))
        }
    }

    /// `q < 1` is the open support.
    fn q(&self, p: Point) -> f64 {
        let (a, b) = self.half_widths();
        let d = p - self.center;
        (d.x / a).powi(2) + (d.y / b).powi(2)
    }

    pub fn in_support(&self, p: Point) -> bool {
        self.q(p) < 1.0
    }

    pub fn jet(&self, p: Point) -> Jet {
        let (a, b) = self.half_widths();
        let d = p - self.center;
        let q = self.q(p);
        if q >= 1.0 {
            return (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        }
        let s = 1.0 - q;
        let (g, g1, g2) = (s.powi(4), -4.0 * s.powi(3), 12.0 * s * s);
        let (qx, qy) = (2.0 * d.x / (a * a), 2.0 * d.y / (b * b));
        let (qxx, qyy) = (2.0 / (a * a), 2.0 / (b * b));
        let gx = g1 * qx;
        let gy = g1 * qy;
        let gxx = g2 * qx * qx + g1 * qxx;
        let gxy = g2 * qx * qy;
        let gyy = g2 * qy * qy + g1 * qyy;
        match self.shape {
            BumpShape::Dipole { radius } => {
                let m = d.x / radius;
                let mx = 1.0 / radius;
                (m * g, mx * g + m * gx, m * gy, 2.0 * mx * gx + m * gxx, mx * gy + m * gxy, m * gyy)
            }
            _ => (g, gx, gy, gxx, gxy, gyy),
        }
    }

    /// `∇⊥b = (−b_y, b_x)`.
    pub fn field(&self, p: Point) -> Point {
        let (_, bx, by, ..) = self.jet(p);
        Point::new(-by, bx)
    }
}

// nodes where the bump or one of its neighbours lives; all must be interior fluid
fn support_nodes(g: &MaskedGrid, bump: &Bump) -> Result<Vec<usize>> {
    bump.validate()?;
    let (a, b) = bump.half_widths();
    let ext = g.extent();
    let m = 1.5 * g.h;
    if bump.center.x - a < ext.min.x + m
        || bump.center.x + a > ext.max.x - m
        || bump.center.y - b < ext.min.y + m
        || bump.center.y + b > ext.max.y - m
    {
        return Err(Error::TestSupport);
    }
    let mut out = Vec::new();
    for k in 0..g.len() {
        if !bump.in_support(g.pos_of(k)) {
            continue;
        }
        let (i, j) = g.ij(k);
        if i == 0 || j == 0 || [k, k + 1, k - 1, k + g.nx, k - g.nx].iter().any(|&n| !g.is_fluid(n)) {
            return Err(Error::TestSupport);
        }
        out.push(k);
    }
    Ok(out)
}

fn pairings(g: &MaskedGrid, u: &VectorField, bump: &Bump, nodes: &[usize]) -> (f64, f64) {
    let mut lin = 0.0;
    let mut quad = 0.0;
    for &k in nodes {
        let p = g.pos_of(k);
        let (_, bx, by, bxx, bxy, byy) = bump.jet(p);
        let v = u.at_node(g, k);
        lin += -v.x * by + v.y * bx;
        quad += (v.y * v.y - v.x * v.x) * bxy + v.x * v.y * (bxx - byy);
    }
    let h2 = g.h * g.h;
    (lin * h2, quad * h2)
}

/// `∫ (u⊗u) : ∇(∇⊥b)` by nodal quadrature.
pub fn convective_pairing(g: &MaskedGrid, u: &VectorField, bump: &Bump) -> Result<f64> {
    if !u.matches(g) {
        return Err(Error::GridMismatch);
    }
    let nodes = support_nodes(g, bump)?;
    Ok(pairings(g, u, bump, &nodes).1)
}

/// Streaming form of [`euler_weak_residual`] for a run on `[t0, t_final]`.
///
/// States are pushed in time order; the first push must be at `t0`.
#[derive(Debug, Clone)]
pub struct ResidualAccumulator {
    bump: Bump,
    nodes: Vec<usize>,
    t0: f64,
    span: f64,
    last: Option<(f64, f64)>,
    total: f64,
    initial: f64,
}

impl ResidualAccumulator {
    pub fn new(g: &MaskedGrid, bump: &Bump, t0: f64, t_final: f64) -> Result<Self> {
        if !(t_final > t0 && t0.is_finite() && t_final.is_finite()) {
            return Err(Error::Invalid(format!("need t0 < t_final, got {t0}, {t_final}")));
        }
        let nodes = support_nodes(g, bump)?;
        Ok(ResidualAccumulator { bump: *bump, nodes, t0, span: t_final - t0, last: None, total: 0.0, initial: 0.0 })
    }

    fn theta(&self, t: f64) -> (f64, f64) {
        let s = 1.0 - (t - self.t0) / self.span;
        (s.powi(3), -3.0 / self.span * s * s)
    }

    pub fn push(&mut self, g: &MaskedGrid, t: f64, u: &VectorField) -> Result<()> {
        if !u.matches(g) {
            return Err(Error::GridMismatch);
        }
        let (lin, quad) = pairings(g, u, &self.bump, &self.nodes);
        let (th, dth) = self.theta(t);
        let f = dth * lin + th * quad;
        match self.last {
            None => {
                if t != self.t0 {
                    return Err(Error::Invalid("first state must sit at t0".into()));
                }
                self.initial = th * lin;
            }
            Some((tp, fp)) => {
                if !(t > tp) {
                    return Err(Error::Invalid("state times must increase".into()));
                }
                self.total += 0.5 * (t - tp) * (f + fp);
            }
        }
        self.last = Some((t, f));
        Ok(())
    }

    pub fn value(&self) -> f64 {
        (self.total + self.initial).abs()
    }
}

/// `|∫∫ (u·∂_tφ + (u⊗u):∇φ) + ∫u⁰·φ(0)|` for `φ = (1 − t/T)³∇⊥b`, `T` the last state's time.
///
/// Space uses nodal quadrature with edge-averaged velocity; time uses the trapezoid rule
/// over the given states.
pub fn euler_weak_residual(g: &MaskedGrid, states: &[FlowState], bump: &Bump) -> Result<f64> {
    if states.len() < 2 {
        return Err(Error::Invalid("need at least two states".into()));
    }
    if states.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Invalid("state times must increase".into()));
    }
    let mut acc = ResidualAccumulator::new(g, bump, states[0].t, states[states.len() - 1].t)?;
    for s in states {
        acc.push(g, s.t, &s.u)?;
    }
    Ok(acc.value())
}
