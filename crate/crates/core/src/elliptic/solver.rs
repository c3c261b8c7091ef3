use super::grid::{MaskedGrid, ScalarField};
use crate::{Error, Result};

const NONE: usize = usize::MAX;

/// PCG controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop when `‖r‖ ≤ rtol·‖b‖`.
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { rtol: 1e-10, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
}

/// Symmetric 5-point operator on the active nodes of a grid, scaled by `h²`:
/// `(A x)_c = diag_c x_c − Σ x_n` over active neighbours `n`.
///
/// Active nodes are numbered in row-major order, so west and south neighbours
/// come first (natural ordering for the incomplete factorisation).
#[derive(Debug, Clone)]
pub struct StencilOperator {
    pub active: Vec<usize>,
    /// Grid index → active index (`usize::MAX` if inactive).
    pub slot: Vec<usize>,
    pub diag: Vec<f64>,
    east: Vec<usize>,
    north: Vec<usize>,
    west: Vec<usize>,
    south: Vec<usize>,
    precon: Vec<f64>,
}

impl StencilOperator {
    /// `active[k]` marks unknowns; `edge(a, b)` says whether the grid edge
    /// between neighbours `a` and `b` belongs to the operator.
    pub fn new(g: &MaskedGrid, active: &[bool], edge: impl Fn(usize, usize) -> bool) -> Self {
        let mut slot = vec![NONE; g.len()];
        let mut list = Vec::new();
        for (k, &a) in active.iter().enumerate() {
            if a {
                slot[k] = list.len();
                list.push(k);
            }
        }
        let n = list.len();
        let mut diag = vec![0.0; n];
        let (mut east, mut north, mut west, mut south) =
            (vec![NONE; n], vec![NONE; n], vec![NONE; n], vec![NONE; n]);
        for (s, &k) in list.iter().enumerate() {
            let (i, j) = g.ij(k);
            let nbrs = [
                (i + 1 < g.nx).then(|| k + 1),
                (j + 1 < g.ny).then(|| k + g.nx),
                (i > 0).then(|| k - 1),
                (j > 0).then(|| k - g.nx),
            ];
            for (d, nb) in nbrs.into_iter().enumerate() {
                let Some(m) = nb else { continue };
                if !edge(k, m) {
                    continue;
                }
                diag[s] += 1.0;
                if slot[m] != NONE {
                    match d {
                        0 => east[s] = slot[m],
                        1 => north[s] = slot[m],
                        2 => west[s] = slot[m],
                        _ => south[s] = slot[m],
                    }
                }
            }
        }
        let mut op = StencilOperator { active: list, slot, diag, east, north, west, south, precon: vec![] };
        op.precon = op.mic0();
        op
    }

    /// Standard Dirichlet operator: all grid edges, unknowns where `!fixed`.
    pub fn dirichlet(g: &MaskedGrid, fixed: &[bool]) -> Self {
        let active: Vec<bool> = fixed.iter().map(|f| !f).collect();
        Self::new(g, &active, |_, _| true)
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for s in 0..x.len() {
            let mut v = self.diag[s] * x[s];
            for nb in [self.east[s], self.north[s], self.west[s], self.south[s]] {
                if nb != NONE {
                    v -= x[nb];
                }
            }
            y[s] = v;
        }
    }

    // modified incomplete Cholesky, τ = 0.97 with safety σ = 0.25
    fn mic0(&self) -> Vec<f64> {
        const TAU: f64 = 0.97;
        const SIGMA: f64 = 0.25;
        let n = self.len();
        let mut p = vec![0.0; n];
        for s in 0..n {
            let mut e = self.diag[s];
            let w = self.west[s];
            if w != NONE {
                let a = -p[w];
                e -= a * a;
                if self.north[w] != NONE {
                    e -= TAU * p[w] * p[w];
                }
            }
            let so = self.south[s];
            if so != NONE {
                let a = -p[so];
                e -= a * a;
                if self.east[so] != NONE {
                    e -= TAU * p[so] * p[so];
                }
            }
            if e < SIGMA * self.diag[s] {
                e = self.diag[s];
            }
            p[s] = 1.0 / e.sqrt();
        }
        p
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        let n = self.len();
        let p = &self.precon;
        let mut q = vec![0.0; n];
        for s in 0..n {
            let mut t = r[s];
            let w = self.west[s];
            if w != NONE {
                t += p[w] * q[w];
            }
            let so = self.south[s];
            if so != NONE {
                t += p[so] * q[so];
            }
            q[s] = t * p[s];
        }
        for s in (0..n).rev() {
            let mut t = q[s];
            let e = self.east[s];
            if e != NONE {
                t += p[s] * z[e];
            }
            let no = self.north[s];
            if no != NONE {
                t += p[s] * z[no];
            }
            z[s] = t * p[s];
        }
    }

    /// Solves `A x = b` by MIC(0)-preconditioned conjugate gradients, starting from `x`.
    pub fn solve(&self, b: &[f64], x: &mut [f64], opts: &SolveOptions) -> Result<SolveReport> {
        let n = self.len();
        let bnorm = norm(b);
        if n == 0 || bnorm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(SolveReport { iterations: 0, residual: 0.0 });
        }
        let mut r = vec![0.0; n];
        self.apply(x, &mut r);
        for s in 0..n {
            r[s] = b[s] - r[s];
        }
        let mut rel = norm(&r) / bnorm;
        if rel <= opts.rtol {
            return Ok(SolveReport { iterations: 0, residual: rel });
        }
        let mut z = vec![0.0; n];
        self.precondition(&r, &mut z);
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        let mut ad = vec![0.0; n];
        for it in 1..=opts.max_iter {
            self.apply(&d, &mut ad);
            let alpha = rz / dot(&d, &ad);
            for s in 0..n {
                x[s] += alpha * d[s];
                r[s] -= alpha * ad[s];
            }
            rel = norm(&r) / bnorm;
            if rel <= opts.rtol {
                return Ok(SolveReport { iterations: it, residual: rel });
            }
            self.precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for s in 0..n {
                d[s] = z[s] + beta * d[s];
            }
        }
        Err(Error::NoConvergence { iterations: opts.max_iter, residual: rel })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `Δ_h ψ = f` on nodes with `fixed[k] == false`, with `ψ = values` on fixed nodes.
///
/// `guess` warm-starts the iteration on the free nodes.
pub fn solve_masked(
    g: &MaskedGrid,
    fixed: &[bool],
    values: &ScalarField,
    f: &ScalarField,
    opts: &SolveOptions,
    guess: Option<&ScalarField>,
) -> Result<(ScalarField, SolveReport)> {
    if fixed.len() != g.len() || !values.matches(g) || !f.matches(g) || guess.is_some_and(|x| !x.matches(g)) {
        return Err(Error::GridMismatch);
    }
    let op = StencilOperator::dirichlet(g, fixed);
    let h2 = g.h * g.h;
    let mut b = vec![0.0; op.len()];
    for (s, &k) in op.active.iter().enumerate() {
        let (i, j) = g.ij(k);
        if i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny {
            return Err(Error::Invalid("free node on the grid border".into()));
        }
        let mut rhs = -h2 * f[k];
        for m in [k + 1, k - 1, k + g.nx, k - g.nx] {
            if fixed[m] {
                rhs += values[m];
            }
        }
        b[s] = rhs;
    }
    let mut x: Vec<f64> = match guess {
        Some(gs) => op.active.iter().map(|&k| gs[k]).collect(),
        None => vec![0.0; op.len()],
    };
    let report = op.solve(&b, &mut x, opts)?;
    let mut out = values.clone();
    for (s, &k) in op.active.iter().enumerate() {
        out[k] = x[s];
    }
    for (k, &fx) in fixed.iter().enumerate() {
        if fx {
            out[k] = values[k];
        }
    }
    Ok((out, report))
}

/// Homogeneous Dirichlet problem `Δ_h ψ = f` in the fluid, `ψ = 0` on all solid nodes.
pub fn solve_dirichlet(g: &MaskedGrid, f: &ScalarField, opts: &SolveOptions) -> Result<ScalarField> {
    if !f.matches(g) {
        return Err(Error::GridMismatch);
    }
    if f.data.iter().enumerate().any(|(k, v)| g.is_fluid(k) && !v.is_finite()) {
        return Err(Error::Invalid("right-hand side not finite".into()));
    }
    let fixed: Vec<bool> = (0..g.len()).map(|k| !g.is_fluid(k)).collect();
    let zero = ScalarField::zeros(g);
    Ok(solve_masked(g, &fixed, &zero, f, opts, None)?.0)
}

/// 5-point Laplacian `(d_e − d_w)/h + (d_n − d_s)/h` with one-sided differences `d`.
pub(crate) fn laplacian_at(g: &MaskedGrid, psi: &ScalarField, k: usize) -> f64 {
    let h = g.h;
    let c = psi[k];
    let de = (psi[k + 1] - c) / h;
    let dw = (c - psi[k - 1]) / h;
    let dn = (psi[k + g.nx] - c) / h;
    let ds = (c - psi[k - g.nx]) / h;
    (de - dw) / h + (dn - ds) / h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::discretize;
    use crate::geometry::{BoxRegion, CompactSet, DomainSpec, Point};

    fn disk(res: usize) -> MaskedGrid {
        let outer = CompactSet::disk(Point::default(), 1.0, 1024).pieces[0].vertices().to_vec();
        discretize(&DomainSpec::bounded(outer, vec![], BoxRegion::square(1.0)), res).unwrap().value
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = disk(32);
        let psi = solve_dirichlet(&g, &ScalarField::zeros(&g), &SolveOptions::default()).unwrap();
        assert!(psi.data.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn residual_meets_tolerance() {
        let g = disk(64);
        let f = g.sample_fluid(|p| (3.0 * p.x).sin() + p.y);
        let psi = solve_dirichlet(&g, &f, &SolveOptions::default()).unwrap();
        let mut r2 = 0.0;
        let mut f2 = 0.0;
        for k in 0..g.len() {
            if g.is_fluid(k) {
                let r = laplacian_at(&g, &psi, k) - f[k];
                r2 += r * r;
                f2 += f[k] * f[k];
            }
        }
        assert!(r2.sqrt() <= 1e-9 * f2.sqrt(), "{}", (r2 / f2).sqrt());
    }

    #[test]
    fn disk_quadratic_first_order() {
        // Δ(1 − r²) = −4; staircase boundary limits the error to O(h)
        let mut errs = vec![];
        for res in [32, 64, 128] {
            let g = disk(res);
            let f = g.sample_fluid(|_| -4.0);
            let psi = solve_dirichlet(&g, &f, &SolveOptions::default()).unwrap();
            let e = (0..g.len())
                .filter(|&k| g.is_fluid(k))
                .map(|k| (psi[k] - (1.0 - g.pos_of(k).norm_sq())).abs())
                .fold(0.0, f64::max);
            errs.push(e * res as f64);
        }
        assert!(errs.iter().all(|e| *e < 4.0), "{errs:?}");
    }

    #[test]
    fn non_convergence_reports_residual() {
        let g = disk(64);
        let f = g.sample_fluid(|p| p.x);
        let opts = SolveOptions { rtol: 1e-14, max_iter: 2 };
        match solve_dirichlet(&g, &f, &opts) {
            Err(Error::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn warm_start_from_solution_is_free() {
        let g = disk(48);
        let f = g.sample_fluid(|p| p.x * p.y);
        let fixed: Vec<bool> = (0..g.len()).map(|k| !g.is_fluid(k)).collect();
        let z = ScalarField::zeros(&g);
        let opts = SolveOptions::default();
        let (psi, _) = solve_masked(&g, &fixed, &z, &f, &opts, None).unwrap();
        let (_, rep) = solve_masked(&g, &fixed, &z, &f, &opts, Some(&psi)).unwrap();
        assert!(rep.iterations <= 1);
    }

    #[test]
    fn max_principle_for_negative_rhs() {
        let g = disk(48);
        let f = g.sample_fluid(|p| -(1.0 + p.x * p.x));
        let psi = solve_dirichlet(&g, &f, &SolveOptions::default()).unwrap();
        assert!(psi.data.iter().all(|v| *v >= -1e-12));
    }
}
