use nalgebra::DMatrix;

use super::grid::{MaskedGrid, Node, ScalarField};
use super::solver::{solve_masked, SolveOptions};
use crate::{Error, Outcome, Result, Warning};

/// `Σ_edges (Δv)²`: the discrete `‖∇v‖²_{L²}` (independent of `h` in 2D).
pub fn dirichlet_energy(g: &MaskedGrid, v: &ScalarField) -> f64 {
    dirichlet_inner(g, v, v)
}

/// `Σ_edges Δa·Δb`.
pub fn dirichlet_inner(g: &MaskedGrid, a: &ScalarField, b: &ScalarField) -> f64 {
    let mut s = 0.0;
    g.for_each_edge(|p, q| s += (a[p] - a[q]) * (b[p] - b[q]));
    s
}

/// Capacity relative to the outer region of an arbitrary node set `e`:
/// the energy of the potential equal to 1 on `e`, 0 on `Outer` nodes,
/// discrete-harmonic elsewhere (other obstacles included).
pub fn capacity_of_nodes(g: &MaskedGrid, e: &[bool], opts: &SolveOptions) -> Result<f64> {
    if e.len() != g.len() {
        return Err(Error::GridMismatch);
    }
    if !e.iter().any(|b| *b) {
        return Ok(0.0);
    }
    let fixed: Vec<bool> = (0..g.len()).map(|k| e[k] || g.nodes[k] == Node::Outer).collect();
    let values = ScalarField::from_vec(g, e.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())?;
    let f = ScalarField::zeros(g);
    let (v, _) = solve_masked(g, &fixed, &values, &f, opts, None)?;
    Ok(dirichlet_energy(g, &v))
}

/// Discrete capacity of obstacle `obstacle` relative to the region inside the outer boundary.
pub fn capacity(g: &MaskedGrid, obstacle: usize, opts: &SolveOptions) -> Result<Outcome<f64>> {
    if obstacle >= g.obstacles {
        return Err(Error::Invalid(format!("no obstacle {obstacle}")));
    }
    let e = g.obstacle_mask(obstacle);
    if !e.iter().any(|b| *b) {
        return Ok(Outcome::with_warnings(0.0, vec![Warning::EmptyObstacle { obstacle }]));
    }
    Ok(Outcome::new(capacity_of_nodes(g, &e, opts)?))
}

/// Harmonic measure of obstacle `i`: 1 on it, 0 on every other solid node.
pub fn harmonic_measure(g: &MaskedGrid, i: usize, opts: &SolveOptions) -> Result<ScalarField> {
    if !g.bounded {
        return Err(Error::ExteriorDomain);
    }
    if i >= g.obstacles {
        return Err(Error::Invalid(format!("no obstacle {i}")));
    }
    let fixed: Vec<bool> = (0..g.len()).map(|k| !g.is_fluid(k)).collect();
    let values = ScalarField::from_vec(
        g,
        g.nodes.iter().map(|n| if *n == Node::Obstacle(i) { 1.0 } else { 0.0 }).collect(),
    )?;
    let f = ScalarField::zeros(g);
    Ok(solve_masked(g, &fixed, &values, &f, opts, None)?.0)
}

/// Condition number above which the Gram matrix is declared singular.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// `P_ij = Σ_edges Δφⁱ Δφʲ` and `C = −P⁻¹`.
pub fn gram_and_coefficients(g: &MaskedGrid, phi: &[ScalarField]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = phi.len();
    if k == 0 {
        return Err(Error::Invalid("need at least one harmonic measure".into()));
    }
    if phi.iter().any(|f| !f.matches(g)) {
        return Err(Error::GridMismatch);
    }
    let mut p = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = dirichlet_inner(g, &phi[i], &phi[j]);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    let sv = p.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= GRAM_CONDITION_LIMIT) {
        return Err(Error::SingularGram { condition });
    }
    let inv = p.clone().try_inverse().ok_or(Error::SingularGram { condition })?;
    Ok((p, -inv))
}

/// Harmonic measures, Gram matrix, coefficient matrix and unit-circulation streams.
#[derive(Debug, Clone)]
pub struct HodgeBasis {
    pub phi: Vec<ScalarField>,
    pub p: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// `ψⁱ = Σ_j C_ij φʲ`: constant on each boundary component, circulation `δ_ij` around obstacle `j`.
    pub psi: Vec<ScalarField>,
}

impl HodgeBasis {
    pub fn build(g: &MaskedGrid, opts: &SolveOptions) -> Result<HodgeBasis> {
        if !g.bounded {
            return Err(Error::ExteriorDomain);
        }
        let k = g.obstacles;
        if k == 0 {
            return Ok(HodgeBasis { phi: vec![], p: DMatrix::zeros(0, 0), c: DMatrix::zeros(0, 0), psi: vec![] });
        }
        let phi = (0..k).map(|i| harmonic_measure(g, i, opts)).collect::<Result<Vec<_>>>()?;
        let (p, c) = gram_and_coefficients(g, &phi)?;
        let psi = (0..k)
            .map(|i| {
                let mut s = ScalarField::zeros(g);
                for (j, f) in phi.iter().enumerate() {
                    s.axpy(c[(i, j)], f);
                }
                s
            })
            .collect();
        Ok(HodgeBasis { phi, p, c, psi })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::discretize;
    use crate::geometry::{BoxRegion, CompactSet, DomainSpec, Point};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn annulus(res: usize, r: f64) -> MaskedGrid {
        let outer = CompactSet::disk(Point::default(), 1.0, 1024).pieces[0].vertices().to_vec();
        let d = DomainSpec::bounded(outer, vec![CompactSet::disk(Point::default(), r, 512)], BoxRegion::square(1.0));
        discretize(&d, res).unwrap().value
    }

    #[test]
    fn harmonic_measure_radial_profile() {
        let g = annulus(256, 0.25);
        let phi = harmonic_measure(&g, 0, &SolveOptions::default()).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..g.len() {
            let r = g.pos_of(k).norm();
            if g.is_fluid(k) && r > 0.35 && r < 0.9 {
                let exact = (1.0 / r).ln() / 4f64.ln();
                worst = worst.max((phi[k] - exact).abs());
            }
        }
        assert!(worst < 0.01, "{worst}");
        for k in 0..g.len() {
            if g.nodes[k] == Node::Obstacle(0) {
                assert_eq!(phi[k], 1.0);
            }
            assert!((-1e-12..=1.0 + 1e-12).contains(&phi[k]));
        }
    }

    #[test]
    fn exterior_rejected() {
        let d = DomainSpec::exterior(vec![CompactSet::disk(Point::default(), 0.2, 32)], BoxRegion::square(1.0));
        let g = discretize(&d, 32).unwrap().value;
        assert!(matches!(harmonic_measure(&g, 0, &SolveOptions::default()), Err(Error::ExteriorDomain)));
    }

    #[test]
    fn annulus_gram_and_stream() {
        let g = annulus(256, 0.25);
        let b = HodgeBasis::build(&g, &SolveOptions::default()).unwrap();
        let cap = 2.0 * PI / 4f64.ln();
        assert!((b.p[(0, 0)] - cap).abs() / cap < 0.03, "{}", b.p[(0, 0)]);
        assert!((b.c[(0, 0)] * b.p[(0, 0)] + 1.0).abs() < 1e-12);
        // ψ¹ ≈ ln(|x|)/2π
        for k in 0..g.len() {
            let r = g.pos_of(k).norm();
            if g.is_fluid(k) && r > 0.4 && r < 0.85 {
                let exact = r.ln() / (2.0 * PI);
                assert!((b.psi[0][k] - exact).abs() < 0.01 * 0.25f64.ln().abs() / (2.0 * PI) + 2e-3);
            }
        }
    }

    #[test]
    fn empty_obstacle_warns() {
        let mut g = annulus(32, 0.25);
        for n in g.nodes.iter_mut() {
            if *n == Node::Obstacle(0) {
                *n = Node::Fluid;
            }
        }
        let c = capacity(&g, 0, &SolveOptions::default()).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.warnings, vec![Warning::EmptyObstacle { obstacle: 0 }]);
    }

    #[test]
    fn singular_gram_detected() {
        let g = annulus(32, 0.25);
        let phi = harmonic_measure(&g, 0, &SolveOptions::default()).unwrap();
        let err = gram_and_coefficients(&g, &[phi.clone(), phi]).unwrap_err();
        assert!(matches!(err, Error::SingularGram { .. }));
    }

    fn node_set(g: &MaskedGrid, cx: f64, cy: f64, r: f64) -> Vec<bool> {
        (0..g.len()).map(|k| g.is_fluid(k) && g.pos_of(k).dist(Point::new(cx, cy)) <= r).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn monotone_and_strongly_subadditive(
            ax in -0.4..0.4f64, ay in -0.4..0.4f64, ar in 0.05..0.3f64,
            bx in -0.4..0.4f64, by in -0.4..0.4f64, br in 0.05..0.3f64,
        ) {
            let outer = CompactSet::disk(Point::default(), 1.0, 256).pieces[0].vertices().to_vec();
            let g = discretize(&DomainSpec::bounded(outer, vec![], BoxRegion::square(1.0)), 48).unwrap().value;
            let opts = SolveOptions::default();
            let a = node_set(&g, ax, ay, ar);
            let b = node_set(&g, bx, by, br);
            let union: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x || *y).collect();
            let inter: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x && *y).collect();
            let ca = capacity_of_nodes(&g, &a, &opts).unwrap();
            let cb = capacity_of_nodes(&g, &b, &opts).unwrap();
            let cu = capacity_of_nodes(&g, &union, &opts).unwrap();
            let ci = capacity_of_nodes(&g, &inter, &opts).unwrap();
            let tol = 1e-6 * (ca + cb);
            prop_assert!(ca <= cu + tol && cb <= cu + tol);
            prop_assert!(ci <= ca + tol && ci <= cb + tol);
            prop_assert!(cu + ci <= ca + cb + tol);
        }
    }
}
