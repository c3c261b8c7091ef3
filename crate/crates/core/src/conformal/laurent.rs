use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{to_c, to_p};
use crate::geometry::{polygon_area, Point};
use crate::{Error, Result};

/// How the forward map is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapForm {
    /// Newton inversion of the inverse series.
    Series,
    /// `T(z) = (z + √(z−1)√(z+1))/ρ`, the exterior map of the ellipse with foci ±1
    /// whose inverse is `(ρw + 1/(ρw))/2`. `ρ = 1` is the slit `[−1, 1]`.
    Joukowski { rho: f64 },
}

/// Exterior Riemann map `T(z) = βz + β̃ + Σ a_k z^{−k}` onto `|w| > 1`, with
/// inverse `T⁻¹(w) = w/β + c₀ + Σ c_k w^{−k}`.
///
/// The inverse series is the master representation; forward coefficients are
/// recovered by contour quadrature and are informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentMap {
    pub beta: f64,
    pub btilde: Complex64,
    /// Forward `a_1, a_2, …`.
    pub coeffs: Vec<Complex64>,
    /// Inverse `c_0, c_1, …`.
    pub inverse_coeffs: Vec<Complex64>,
    /// Max `||T(z)| − 1|` over the boundary samples used to build the map.
    pub defect: f64,
    pub form: MapForm,
}

/// Relative tolerance for the inner Newton solve `T⁻¹(w) = z`.
const NEWTON_TOL: f64 = 1e-14;

impl LaurentMap {
    /// Builds a map from its inverse series and fills in the forward data.
    pub fn from_inverse(beta: f64, inverse_coeffs: Vec<Complex64>, form: MapForm) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) || inverse_coeffs.is_empty() {
            return Err(Error::Invalid("leading coefficient must be positive and c₀ present".into()));
        }
        if inverse_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite inverse coefficient".into()));
        }
        let mut m = LaurentMap { beta, btilde: Complex64::new(0.0, 0.0), coeffs: vec![], inverse_coeffs, defect: 0.0, form };
        m.fill_forward();
        Ok(m)
    }

    /// `T(z) = (z − c)/R`: exterior of the disk of radius `r` about `c`.
    pub fn disk(center: Point, r: f64) -> Result<Self> {
        Self::from_inverse(1.0 / r, vec![to_c(center)], MapForm::Series)
    }

    /// Number of inverse terms beyond the linear one.
    pub fn terms(&self) -> usize {
        self.inverse_coeffs.len() - 1
    }

    /// `T⁻¹(w)`.
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        let iw = w.inv();
        // Horner in 1/w on c_0 + c_1/w + …
        let mut s = Complex64::new(0.0, 0.0);
        for c in self.inverse_coeffs.iter().rev() {
            s = s * iw + c;
        }
        w / self.beta + s
    }

    /// `dT⁻¹/dw`.
    pub fn inverse_deriv(&self, w: Complex64) -> Complex64 {
        let iw = w.inv();
        let mut s = Complex64::new(0.0, 0.0);
        for (k, c) in self.inverse_coeffs.iter().enumerate().skip(1).rev() {
            s = s * iw + c * (-(k as f64));
        }
        // s currently holds Σ −k c_k w^{−(k−1)}; one more 1/w² factor
        Complex64::new(1.0 / self.beta, 0.0) + s * iw * iw
    }

    // Newton on T⁻¹(w) = z without any exterior check.
    fn solve_w(&self, z: Complex64) -> Option<Complex64> {
        let scale = 1.0 + z.norm();
        let c0 = self.inverse_coeffs[0];
        let mut guess = (z - c0) * self.beta;
        if guess.norm() < 1.05 {
            guess = if guess.norm() > 1e-12 { guess / guess.norm() * 1.05 } else { Complex64::new(1.05, 0.0) };
        }
        if let Some(w) = self.newton(z, guess, scale) {
            return Some(w);
        }
        // continuation inward from far along the same ray
        let dir = if (z - c0).norm() > 0.0 { (z - c0) / (z - c0).norm() } else { Complex64::new(1.0, 0.0) };
        let far = 8.0 * (1.0 + self.radius_hint()) + (z - c0).norm();
        let mut w = (dir * far) * self.beta;
        let steps = 64;
        for s in 1..=steps {
            let t = s as f64 / steps as f64;
            let zs = c0 + dir * far * (1.0 - t) + (z - c0) * t;
            w = self.newton(zs, w, 1.0 + zs.norm())?;
        }
        Some(w)
    }

    fn radius_hint(&self) -> f64 {
        self.inverse_coeffs.iter().skip(1).map(|c| c.norm()).sum::<f64>() + 1.0 / self.beta
    }

    fn newton(&self, z: Complex64, mut w: Complex64, scale: f64) -> Option<Complex64> {
        let mut r = self.inverse(w) - z;
        for _ in 0..60 {
            if r.norm() <= NEWTON_TOL * scale {
                return Some(w);
            }
            let d = self.inverse_deriv(w);
            if d.norm() == 0.0 || !d.is_finite() {
                return None;
            }
            let step = r / d;
            let mut lam = 1.0;
            loop {
                let wn = w - step * lam;
                let rn = self.inverse(wn) - z;
                if rn.norm() < r.norm() || lam < 1e-6 {
                    w = wn;
                    r = rn;
                    break;
                }
                lam *= 0.5;
            }
            if !w.is_finite() {
                return None;
            }
        }
        (r.norm() <= 1e3 * NEWTON_TOL * scale).then_some(w)
    }

    /// `T(z)`; errors for points inside the obstacle (or on a slit).
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let (re, im) = (z.re, z.im);
        let w = match self.form {
            MapForm::Joukowski { rho } => {
                if im == 0.0 && re.abs() <= 1.0 {
                    return Err(Error::InsideObstacle((re, im)));
                }
                (z + (z - 1.0).sqrt() * (z + 1.0).sqrt()) / rho
            }
            MapForm::Series => self.solve_w(z).ok_or(Error::InsideObstacle((re, im)))?,
        };
        if !(w.norm() > 1.0 - 1e-12) {
            return Err(Error::InsideObstacle((re, im)));
        }
        Ok(w)
    }

    /// `T(z)` together with `T′(z)`.
    pub fn eval_with_deriv(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let w = self.eval(z)?;
        let d = match self.form {
            MapForm::Joukowski { rho } => {
                let s = (z - 1.0).sqrt() * (z + 1.0).sqrt();
                (s + z) / (s * rho)
            }
            MapForm::Series => self.inverse_deriv(w).inv(),
        };
        Ok((w, d))
    }

    /// `T` at a plane point.
    pub fn map_point(&self, p: Point) -> Result<Point> {
        self.eval(to_c(p)).map(to_p)
    }

    /// `| |T(z)| − 1 |` without the exterior check.
    pub fn modulus_defect(&self, z: Complex64) -> f64 {
        match self.form {
            MapForm::Joukowski { rho } => ((z + (z - 1.0).sqrt() * (z + 1.0).sqrt()).norm() / rho - 1.0).abs(),
            MapForm::Series => self.solve_w(z).map_or(f64::INFINITY, |w| (w.norm() - 1.0).abs()),
        }
    }

    /// Boundary curve `T⁻¹(e^{iθ})` at `n` equally spaced angles.
    pub fn boundary(&self, n: usize) -> Vec<Point> {
        (0..n).map(|k| to_p(self.inverse(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)))).collect()
    }

    /// `max |T⁻¹(e^{iθ})|`: radius of a centred disk containing the obstacle.
    pub fn obstacle_radius(&self, n: usize) -> f64 {
        self.boundary(n).iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    // forward coefficients by ∮ T(z) z^{k−1} dz over the image of |w| = 2
    fn fill_forward(&mut self) {
        let n = 1024;
        let k_max = self.terms().max(1);
        let mut a = vec![Complex64::new(0.0, 0.0); k_max + 1];
        for m in 0..n {
            let w = Complex64::from_polar(2.0, 2.0 * PI * m as f64 / n as f64);
            let z = self.inverse(w);
            let dz = self.inverse_deriv(w);
            // dz = dz/dw · i w dθ, and 1/(2πi) cancels the i
            let base = w * dz * w / n as f64;
            let mut zp = z.inv();
            for ak in a.iter_mut() {
                *ak += base * zp;
                zp *= z;
            }
        }
        self.btilde = a[0];
        self.coeffs = a[1..].to_vec();
    }
}

/// The slit map `T(z) = z + √(z−1)√(z+1)`, `β = 2`, inverse `(w + 1/w)/2`.
///
/// The branch is the product of principal square roots, which is continuous off
/// `[−1, 1]` and behaves like `2z` as `z → ∞`.
pub fn joukowski_map() -> LaurentMap {
    scaled_joukowski(1.0).expect("ρ = 1 is valid")
}

/// Exterior map of the ellipse with semi-axes `((ρ+1/ρ)/2, (ρ−1/ρ)/2)`.
pub fn scaled_joukowski(rho: f64) -> Result<LaurentMap> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(Error::Invalid(format!("ellipse parameter must be ≥ 1, got {rho}")));
    }
    let half = Complex64::new(0.5, 0.0);
    LaurentMap::from_inverse(2.0 / rho, vec![Complex64::new(0.0, 0.0), half / rho], MapForm::Joukowski { rho })
}

/// Parameters of [`fit_exterior_map_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Inverse terms `c_1 … c_K`.
    pub terms: usize,
    /// Largest accepted modulus defect.
    pub threshold: f64,
    pub ridge: f64,
    pub max_iter: usize,
}

impl FitOptions {
    pub fn new(terms: usize) -> Self {
        FitOptions { terms, threshold: 1e-6, ridge: 1e-12, max_iter: 200 }
    }
}

/// Least-squares exterior map of a sampled smooth Jordan curve with `K` inverse terms.
pub fn fit_exterior_map(boundary: &[Point], terms: usize) -> Result<LaurentMap> {
    fit_exterior_map_with(boundary, &FitOptions::new(terms))
}

/// Collocation fit: find angles `θ_m` and coefficients with `T⁻¹(e^{iθ_m}) = z_m`
/// (Gauss–Newton with the angles eliminated per point), then report the
/// modulus defect of the forward map on the input samples.
pub fn fit_exterior_map_with(boundary: &[Point], opts: &FitOptions) -> Result<LaurentMap> {
    let k = opts.terms;
    if k < 4 {
        return Err(Error::Invalid(format!("need at least 4 terms, got {k}")));
    }
    if boundary.len() < 8 || boundary.iter().any(|p| !p.is_finite()) {
        return Err(Error::Invalid("need at least 8 finite boundary samples".into()));
    }
    let mut pts: Vec<Point> = boundary.to_vec();
    if polygon_area(&pts) < 0.0 {
        pts.reverse();
    }
    let n = pts.len();
    if n < (4 * k).max(256) {
        return Err(Error::Invalid(format!("need at least {} boundary samples for {k} terms, got {n}", (4 * k).max(256))));
    }
    let zs: Vec<Complex64> = pts.iter().copied().map(to_c).collect();
    let centroid = zs.iter().sum::<Complex64>() / n as f64;
    let offset = (zs[0] - centroid).arg();
    // initial angles from chord-length fractions
    let mut cum = vec![0.0; n + 1];
    for m in 0..n {
        cum[m + 1] = cum[m] + (zs[(m + 1) % n] - zs[m]).norm();
    }
    let mut theta: Vec<f64> = (0..n).map(|m| offset + 2.0 * PI * cum[m] / cum[n]).collect();
    // initial coefficients: circle through the samples
    let r0 = zs.iter().map(|z| (z - centroid).norm()).sum::<f64>() / n as f64;
    let np = 1 + 2 * (k + 1);
    let mut x = vec![0.0; np];
    x[0] = r0;
    x[1] = centroid.re;
    x[2] = centroid.im;

    let unpack = |x: &[f64]| -> (f64, Vec<Complex64>) {
        (x[0], (0..=k).map(|j| Complex64::new(x[1 + 2 * j], x[2 + 2 * j])).collect())
    };
    let residuals = |x: &[f64], theta: &[f64]| -> Vec<Complex64> {
        let (r, c) = unpack(x);
        theta
            .iter()
            .zip(&zs)
            .map(|(&t, &z)| {
                let w = Complex64::from_polar(1.0, t);
                let iw = w.inv();
                let mut s = Complex64::new(0.0, 0.0);
                for cj in c.iter().rev() {
                    s = s * iw + cj;
                }
                w * r + s - z
            })
            .collect()
    };
    let cost = |f: &[Complex64]| f.iter().map(|v| v.norm_sqr()).sum::<f64>();

    let mut f = residuals(&x, &theta);
    let mut c_now = cost(&f);
    for _ in 0..opts.max_iter {
        let (r, c) = unpack(&x);
        let mut s = DMatrix::<f64>::zeros(np, np);
        let mut rhs = DVector::<f64>::zeros(np);
        let mut per_point = Vec::with_capacity(n);
        for m in 0..n {
            let w = Complex64::from_polar(1.0, theta[m]);
            let iw = w.inv();
            // ∂F/∂θ = T⁻¹′(w)·iw
            let mut dsum = Complex64::new(0.0, 0.0);
            let mut pw = iw;
            for (j, cj) in c.iter().enumerate().skip(1) {
                dsum += cj * (-(j as f64)) * pw * iw;
                pw *= iw;
            }
            let d = (Complex64::new(r, 0.0) + dsum) * Complex64::i() * w;
            // columns of A_m as complex numbers
            let mut cols = Vec::with_capacity(np);
            cols.push(w);
            let mut pw = Complex64::new(1.0, 0.0);
            for _ in 0..=k {
                cols.push(pw);
                cols.push(pw * Complex64::i());
                pw *= iw;
            }
            let dot = |a: Complex64, b: Complex64| a.re * b.re + a.im * b.im;
            let dd = d.norm_sqr() + opts.ridge;
            let adv: Vec<f64> = cols.iter().map(|a| dot(*a, d)).collect();
            let df = dot(d, f[m]);
            for p in 0..np {
                rhs[p] -= dot(cols[p], f[m]) - adv[p] * df / dd;
                for q in p..np {
                    s[(p, q)] += dot(cols[p], cols[q]) - adv[p] * adv[q] / dd;
                }
            }
            per_point.push((adv, df, dd));
        }
        for p in 0..np {
            s[(p, p)] += opts.ridge;
            for q in 0..p {
                s[(p, q)] = s[(q, p)];
            }
        }
        let dx = match s.cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => return Err(Error::Invalid("fit normal equations are singular".into())),
        };
        let dtheta: Vec<f64> = per_point
            .iter()
            .map(|(adv, df, dd)| -(df + adv.iter().zip(dx.iter()).map(|(a, b)| a * b).sum::<f64>()) / dd)
            .collect();
        let mut lam = 1.0;
        let mut accepted = false;
        while lam > 1e-8 {
            let xn: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a + lam * b).collect();
            let tn: Vec<f64> = theta.iter().zip(&dtheta).map(|(a, b)| a + lam * b).collect();
            let fnew = residuals(&xn, &tn);
            let cn = cost(&fnew);
            if cn <= c_now {
                let gain = c_now - cn;
                x = xn;
                theta = tn;
                f = fnew;
                c_now = cn;
                accepted = gain > 1e-30 || cn == 0.0;
                break;
            }
            lam *= 0.5;
        }
        let step = dx.norm() * lam;
        if !accepted || step < 1e-14 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            break;
        }
    }
    let (r, c) = unpack(&x);
    if !(r > 0.0) {
        return Err(Error::Invalid("fit produced a non-positive scale".into()));
    }
    let mut map = LaurentMap::from_inverse(1.0 / r, c, MapForm::Series)?;
    map.defect = pts.iter().map(|p| map.modulus_defect(to_c(*p))).fold(0.0, f64::max);
    if !(map.defect <= opts.threshold) {
        return Err(Error::FitDefect { defect: map.defect, threshold: opts.threshold });
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn joukowski_closed_form() {
        let t = joukowski_map();
        let w = t.eval(c(2.0, 0.0)).unwrap();
        assert!((w.re - (2.0 + 3f64.sqrt())).abs() < 1e-14 && w.im == 0.0);
        assert!((t.inverse(w) - c(2.0, 0.0)).norm() < 1e-14);
        assert_eq!(t.beta, 2.0);
        for x in [-0.9, -0.3, 0.0, 0.5, 0.99] {
            for s in [1.0, -1.0] {
                let v = t.eval(c(x, s * 1e-12)).unwrap();
                assert!((v.norm() - 1.0).abs() < 1e-6, "{x}");
            }
        }
        assert!(matches!(t.eval(c(0.3, 0.0)), Err(Error::InsideObstacle(_))));
        // β̃ = 0, a₁ = −1/2
        assert!(t.btilde.norm() < 1e-12);
        assert!((t.coeffs[0] - c(-0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn joukowski_far_branch() {
        let t = joukowski_map();
        for z in [c(-3.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(-5.0, 0.1), c(-5.0, -0.1)] {
            let w = t.eval(z).unwrap();
            assert!(w.norm() > 1.0);
            assert!((t.inverse(w) - z).norm() < 1e-13);
        }
    }

    #[test]
    fn joukowski_derivative() {
        let t = joukowski_map();
        let z = c(0.7, 0.4);
        let (_, d) = t.eval_with_deriv(z).unwrap();
        let e = 1e-6;
        let fd = (t.eval(z + e).unwrap() - t.eval(z - e).unwrap()) / (2.0 * e);
        assert!((d - fd).norm() < 1e-7);
    }

    #[test]
    fn series_map_inverts_joukowski() {
        // the same slit map evaluated by Newton on its inverse series
        let s = LaurentMap::from_inverse(2.0, vec![c(0.0, 0.0), c(0.5, 0.0)], MapForm::Series).unwrap();
        let j = joukowski_map();
        for z in [c(2.0, 0.0), c(0.1, 0.05), c(-0.99, -0.01), c(0.0, 3.0), c(1.2, -0.2)] {
            let a = s.eval(z).unwrap();
            let b = j.eval(z).unwrap();
            assert!((a - b).norm() < 1e-10, "{z}: {a} vs {b}");
            let (_, da) = s.eval_with_deriv(z).unwrap();
            let (_, db) = j.eval_with_deriv(z).unwrap();
            assert!((da - db).norm() < 1e-8 * db.norm());
        }
    }

    #[test]
    fn circle_fit_is_single_term() {
        let r = 0.7;
        let pts: Vec<Point> = (0..300).map(|k| {
            let t = 2.0 * PI * k as f64 / 300.0;
            Point::new(r * t.cos(), r * t.sin())
        }).collect();
        let m = fit_exterior_map(&pts, 8).unwrap();
        assert!((m.beta - 1.0 / r).abs() < 1e-10);
        assert!(m.inverse_coeffs.iter().all(|c| c.norm() < 1e-10));
        let w = m.eval(c(2.0, 0.0)).unwrap();
        assert!((w - c(2.0 / r, 0.0)).norm() < 1e-9);
        let d = LaurentMap::disk(Point::default(), r).unwrap();
        assert!((d.eval(c(0.0, 1.5)).unwrap() - c(0.0, 1.5 / r)).norm() < 1e-14);
    }

    #[test]
    fn ellipse_fit_matches_scaled_joukowski() {
        let rho: f64 = 1.4;
        let (a, b) = ((rho + 1.0 / rho) / 2.0, (rho - 1.0 / rho) / 2.0);
        // sample by arc angle, not by the conformal parameter
        let pts: Vec<Point> = (0..400).map(|k| {
            let t = 2.0 * PI * k as f64 / 400.0 + 0.3 * (2.0 * PI * k as f64 / 400.0).sin();
            Point::new(a * t.cos(), b * t.sin())
        }).collect();
        let m = fit_exterior_map(&pts, 32).unwrap();
        let j = scaled_joukowski(rho).unwrap();
        assert!(m.defect <= 1e-6, "{}", m.defect);
        assert!((m.beta - j.beta).abs() < 1e-6);
        for z in [c(2.0, 0.0), c(0.0, 1.0), c(-1.5, 0.7), c(a * 1.01, 0.0)] {
            assert!((m.eval(z).unwrap() - j.eval(z).unwrap()).norm() < 1e-6);
        }
    }

    #[test]
    fn blob_fit_is_consistent() {
        let pts: Vec<Point> = (0..512).map(|k| {
            let t = 2.0 * PI * k as f64 / 512.0;
            let r = 1.0 + 0.15 * (2.0 * t).cos() + 0.08 * (3.0 * t + 0.4).sin();
            Point::new(0.2 + r * t.cos(), -0.1 + r * t.sin())
        }).collect();
        let m = fit_exterior_map(&pts, 64).unwrap();
        assert!(m.beta > 0.0 && m.defect <= 1e-6);
        // composition on a probe annulus
        for k in 0..64 {
            let w = Complex64::from_polar(1.3 + 0.02 * k as f64, 0.37 * k as f64);
            let z = m.inverse(w);
            assert!((m.eval(z).unwrap() - w).norm() < 1e-10);
        }
        let json = serde_json::to_string(&m).unwrap();
        let back: LaurentMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back.inverse_coeffs, m.inverse_coeffs);
    }

    #[test]
    fn fit_rejects_few_terms_and_bad_shapes() {
        let sq: Vec<Point> = (0..64).map(|k| {
            let s = 4.0 * k as f64 / 64.0;
            let t = s.fract() * 2.0 - 1.0;
            match s as usize { 0 => Point::new(t, -1.0), 1 => Point::new(1.0, t), 2 => Point::new(-t, 1.0), _ => Point::new(-1.0, -t) }
        }).collect();
        assert!(matches!(fit_exterior_map(&sq, 3), Err(Error::Invalid(_))));
        assert!(matches!(fit_exterior_map(&sq, 8), Err(Error::Invalid(_))));
        let dense: Vec<Point> = (0..256).map(|k| {
            let s = 4.0 * k as f64 / 256.0;
            let t = s.fract() * 2.0 - 1.0;
            match s as usize { 0 => Point::new(t, -1.0), 1 => Point::new(1.0, t), 2 => Point::new(-t, 1.0), _ => Point::new(-1.0, -t) }
        }).collect();
        // corners cannot be represented to 1e-6 with 8 terms
        assert!(matches!(fit_exterior_map(&dense, 8), Err(Error::FitDefect { .. })));
    }
}
