use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::laurent::LaurentMap;
use super::{to_c, to_p};
use crate::geometry::Point;
use crate::{Error, Result};

/// Samples per circle for the sampled ingredients of the far-field bound.
pub const FAR_FIELD_SAMPLES: usize = 4096;

/// Ingredients and value of the far-field velocity bound `C₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldBound {
    /// `sup |DT|` on `|x| ≥ R₀`.
    pub c1: f64,
    /// `dist(T(∂B_{R̃₀}), T(∂B_{R₀}))`.
    pub delta: f64,
    /// `sup |det DT⁻¹|` on `T(B_{R̃₀}ᶜ)`.
    pub c2: f64,
    /// Whole-plane Biot–Savart interpolation constant for exponent `p`.
    pub c3: f64,
    pub alpha_p: f64,
    pub c0: f64,
}

/// `α_p` and `C₃` in `|∫ (z−η)⊥/|z−η|² g| ≤ C₃ ‖g‖₁^{α_p} ‖g‖_p^{1−α_p}`.
///
/// Splitting the integral at radius `R` and optimising over `R` gives
/// `α_p = (p−2)/(2p−2)` and `C₃ = (1+a) a^{−a/(1+a)} A^{1/(1+a)}` with
/// `a = 1 − 2/p`, `A = (2π/(2−p′))^{1/p′}`.
pub fn interpolation_constant(p: f64) -> Result<(f64, f64)> {
    if !(p > 2.0) {
        return Err(Error::ExponentTooSmall(p));
    }
    let a = 1.0 - 2.0 / p;
    let pp = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
    let big_a = (2.0 * PI / (2.0 - pp)).powf(1.0 / pp);
    let alpha = a / (1.0 + a);
    let c3 = (1.0 + a) * a.powf(-alpha) * big_a.powf(1.0 / (1.0 + a));
    Ok((alpha, c3))
}

fn circle(r: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |k| Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64))
}

/// `C₀ = (C₁/2π)(2‖ω‖₁/δ + C₃ C₂^{(1−α_p)(1−1/p)} ‖ω‖₁^{α_p} ‖ω‖_p^{1−α_p})`.
///
/// `C₁` and `C₂` are analytic at infinity, so their suprema over the exterior
/// regions are taken over the bounding circle and the value at infinity.
pub fn far_field_bound(map: &LaurentMap, l1: f64, lp: f64, r_inner: f64, r0: f64, p: f64) -> Result<FarFieldBound> {
    let (alpha_p, c3) = interpolation_constant(p)?;
    if !(r_inner > 0.0 && r_inner < r0 && r0.is_finite()) {
        return Err(Error::Invalid(format!("need 0 < R̃₀ < R₀, got {r_inner}, {r0}")));
    }
    if !(l1 >= 0.0 && lp >= 0.0) {
        return Err(Error::Invalid("norms must be non-negative".into()));
    }
    let n = FAR_FIELD_SAMPLES;
    // the obstacle must sit inside B(0, R̃₀)
    if map.obstacle_radius(n) >= r_inner {
        return Err(Error::NotContained(format!("obstacle is not inside B(0, {r_inner})")));
    }
    let outer: Vec<(Complex64, Complex64)> =
        circle(r0, n).map(|z| map.eval_with_deriv(z)).collect::<Result<_>>()?;
    let inner: Vec<(Complex64, Complex64)> =
        circle(r_inner, n).map(|z| map.eval_with_deriv(z)).collect::<Result<_>>()?;
    let c1 = outer.iter().map(|(_, d)| d.norm()).fold(map.beta, f64::max);
    let c2 = inner.iter().map(|(_, d)| 1.0 / d.norm_sqr()).fold(1.0 / (map.beta * map.beta), f64::max);
    let delta = outer
        .par_iter()
        .map(|(a, _)| inner.iter().map(|(b, _)| (a - b).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min);
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let interp = if l1 == 0.0 { 0.0 } else { c3 * c2.powf((1.0 - alpha_p) * (1.0 - inv_p)) * l1.powf(alpha_p) * lp.powf(1.0 - alpha_p) };
    let c0 = c1 / (2.0 * PI) * (2.0 * l1 / delta + interp);
    Ok(FarFieldBound { c1, delta, c2, c3, alpha_p, c0 })
}

/// Sampled discrepancies between an approximating map and its limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaratheodoryGap {
    pub map: f64,
    pub deriv: f64,
    /// `sup | |T_n| − 1 |` over the trapped probes (0 if none given).
    pub trapped: f64,
}

/// Sup-norm gaps of `T_n − T` and `T_n′ − T′` on `probes`, and of `|T_n| − 1` on `trapped`.
pub fn caratheodory_gap(tn: &LaurentMap, limit: &LaurentMap, probes: &[Point], trapped: &[Point]) -> Result<CaratheodoryGap> {
    let mut g = CaratheodoryGap { map: 0.0, deriv: 0.0, trapped: 0.0 };
    for p in probes {
        let (a, da) = tn.eval_with_deriv(to_c(*p))?;
        let (b, db) = limit.eval_with_deriv(to_c(*p))?;
        g.map = g.map.max((a - b).norm());
        g.deriv = g.deriv.max((da - db).norm());
    }
    for p in trapped {
        let w = tn.eval(to_c(*p))?;
        g.trapped = g.trapped.max((w.norm() - 1.0).abs());
    }
    Ok(g)
}

/// Probe points on the annulus `r_min ≤ |z| ≤ r_max` (polar lattice).
pub fn annulus_probes(r_min: f64, r_max: f64, radial: usize, angular: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(radial * angular);
    for i in 0..radial {
        let r = if radial == 1 { r_min } else { r_min + (r_max - r_min) * i as f64 / (radial - 1) as f64 };
        out.extend(circle(r, angular).map(to_p));
    }
    out
}
