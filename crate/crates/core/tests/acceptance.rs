//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughflow::conformal::{
    annulus_probes, biot_savart_exterior, biot_savart_free, caratheodory_gap, far_field_bound, joukowski_map,
    scaled_joukowski, LaurentMap, Particle, VortexEnsemble,
};
use roughflow::elliptic::{capacity, discretize, HodgeBasis, MaskedGrid, ScalarField, SolveOptions};
use roughflow::experiments::{
    arc_flow_study, capacity_dichotomy_study, domain_continuity_study, gamma_dirichlet_study, ArcConfig,
    ContinuityConfig, DichotomyConfig, GammaConfig,
};
use roughflow::hodge::{assemble_velocity, curl, cutoff, energy, lq_norm, perp_grad, weak_circulation, Bump, ResidualAccumulator};
use roughflow::transport::{
    simulate, ExteriorObstacle, GridSim, InitialVorticity, Interpolation, Method, SimConfig, Snapshot,
};
use roughflow::{BoxRegion, CompactSet, DomainSpec, Point};

fn verdict(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn disk_domain(res: usize, holes: Vec<CompactSet>) -> MaskedGrid {
    let outer = CompactSet::disk(Point::default(), 1.0, 1024).pieces[0].vertices().to_vec();
    discretize(&DomainSpec::bounded(outer, holes, BoxRegion::square(1.0)), res).unwrap().value
}

#[test]
fn capacity_oracle() {
    let start = Instant::now();
    let g = disk_domain(512, vec![CompactSet::disk(Point::default(), 0.25, 1024)]);
    let c = capacity(&g, 0, &SolveOptions::default()).unwrap().value;
    let exact = 2.0 * PI / 4f64.ln();
    let rel = (c - exact).abs() / exact;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "capacity_oracle",
        rel <= 0.02 && secs < 30.0,
        format!("capacity {c:.5} vs {exact:.5}, rel {rel:.3e} <= 0.02, h = {}, {secs:.1}s < 30s", g.h),
    );
}

#[test]
fn capacity_dichotomy() {
    let r = capacity_dichotomy_study(&DichotomyConfig::default()).unwrap().value;
    let pc = r.column("point_capacity").unwrap();
    let dec = &r.checks[0];
    let seg = &r.checks[1];
    verdict(
        "capacity_dichotomy",
        dec.pass && seg.pass,
        format!("point capacities {pc:.4?} strictly decreasing = {}, segment gap over last three n {:.3e} <= 0.05", dec.pass, seg.value),
    );
}

#[test]
fn gamma_convergence_thicken_arc() {
    let start = Instant::now();
    let cfg = GammaConfig { family: "thicken_arc".into(), alpha: None, n_max: 6, f: 1.0, resolutions: vec![256], final_ratio: 0.25 };
    let r = gamma_dirichlet_study(&cfg).unwrap().value;
    let gaps = r.column("gap_256").unwrap();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "gamma_convergence",
        r.passed() && secs < 300.0,
        format!("gaps {gaps:.4?}, strictly decreasing = {}, final/initial {:.3} <= 0.25, {secs:.1}s", r.checks[0].pass, r.checks[1].value),
    );
}

fn two_obstacles(res: usize) -> MaskedGrid {
    disk_domain(
        res,
        vec![CompactSet::disk(Point::new(-0.4, 0.0), 0.15, 512), CompactSet::disk(Point::new(0.4, 0.1), 0.2, 512)],
    )
}

#[test]
fn hodge_circulation_duality() {
    let g = two_obstacles(256);
    let opts = SolveOptions::default();
    let basis = HodgeBasis::build(&g, &opts).unwrap();
    let zero = ScalarField::zeros(&g);
    let chis: Vec<_> = (0..2).map(|j| cutoff(&g, j, 0.08).unwrap()).collect();
    let mut worst: f64 = 0.0;
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        let u = perp_grad(&g, &basis.psi[i]).unwrap();
        for j in 0..2 {
            let v = weak_circulation(&g, &u, &zero, &chis[j]).unwrap();
            m[i][j] = v;
            worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    verdict("hodge_duality", worst <= 0.02, format!("gamma_j(perp grad psi_i) = {m:.5?}, max deviation {worst:.3e} <= 0.02"));
}

#[test]
fn hodge_uniqueness_round_trip() {
    let g = two_obstacles(192);
    let opts = SolveOptions::default();
    let basis = HodgeBasis::build(&g, &opts).unwrap();
    let chis: Vec<_> = (0..2).map(|j| cutoff(&g, j, 0.08).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let blobs: Vec<(Point, f64, f64)> = (0..4)
            .map(|_| {
                let a = rng.gen_range(0.0..2.0 * PI);
                let r = rng.gen_range(0.0..0.8);
                (Point::new(r * a.cos(), r * a.sin()), rng.gen_range(0.05..0.2), rng.gen_range(-3.0..3.0))
            })
            .collect();
        let w = g.sample_fluid(|p| blobs.iter().map(|&(c, s, a)| a * (-(p - c).norm_sq() / (2.0 * s * s)).exp()).sum());
        let gamma = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let u = assemble_velocity(&g, &basis, &w, &gamma, &opts).unwrap().u;
        let mut w2 = curl(&g, &u).unwrap();
        for k in 0..g.len() {
            if !g.is_fluid(k) {
                w2[k] = 0.0;
            }
        }
        let g2: Vec<f64> = chis.iter().map(|c| weak_circulation(&g, &u, &w2, c).unwrap()).collect();
        let u2 = assemble_velocity(&g, &basis, &w2, &g2, &opts).unwrap().u;
        let mut d = u2.clone();
        d.axpy(-1.0, &u);
        worst = worst.max((d.sum_sq() / u.sum_sq()).sqrt());
    }
    verdict("hodge_uniqueness", worst <= 1e-3, format!("max relative reassembly residual over 3 random states {worst:.3e} <= 1e-3"));
}

#[test]
fn exterior_tangency() {
    let map = LaurentMap::disk(Point::default(), 1.0).unwrap();
    let ens = VortexEnsemble::new(vec![Particle { pos: Point::new(1.7, 0.4), strength: 1.3 }], 0.0, 0.0);
    let n = 1000;
    let mut worst: f64 = 0.0;
    let mut free: f64 = 0.0;
    for k in 0..n {
        let a = 2.0 * PI * k as f64 / n as f64;
        let nrm = Point::new(a.cos(), a.sin());
        worst = worst.max(biot_savart_exterior(&map, &ens, nrm).unwrap().dot(nrm).abs());
        free = free.max(biot_savart_free(&map, &ens, nrm).unwrap().dot(nrm).abs());
    }
    verdict(
        "exterior_tangency",
        worst <= 1e-10 && free > 1e-3,
        format!("max |u.n| on {n} boundary samples {worst:.3e} <= 1e-10 (free-space kernel: {free:.3e})"),
    );
}

#[test]
fn conservation_suite() {
    let g = disk_domain(256, vec![CompactSet::disk(Point::default(), 0.2, 1024)]);
    let opts = SolveOptions::default();
    let basis = HodgeBasis::build(&g, &opts).unwrap();
    let w0 = g.sample_fluid(|p| (1.0 - (p.norm() / 0.8).powi(2)).max(0.0).powi(3));
    let gamma = [0.5];
    let mut sim = GridSim::new(g, basis, &w0, &gamma, opts, Interpolation::default()).unwrap();
    let e0 = energy(&sim.grid, &sim.state.u).unwrap();
    let l2_0 = lq_norm(&sim.grid, &sim.state.omega, 2.0).unwrap();
    let mut linf = lq_norm(&sim.grid, &sim.state.omega, f64::INFINITY).unwrap();
    let (mut de, mut dl2) = (0.0f64, 0.0f64);
    let mut monotone = true;
    let mut held = true;
    while sim.state.t < 1.0 - 1e-12 {
        let dt = sim.default_dt().min(1.0 - sim.state.t);
        sim.step(dt).unwrap();
        let r = sim.diagnostics(0).unwrap();
        de = de.max((r.energy - e0).abs() / e0);
        dl2 = dl2.max((r.omega_l2 - l2_0).abs() / l2_0);
        monotone &= r.omega_linf <= linf;
        linf = r.omega_linf;
        held &= r.circulation.len() == 1 && r.circulation[0].to_bits() == gamma[0].to_bits();
    }
    verdict(
        "conservation_suite",
        de <= 0.01 && dl2 <= 0.02 && monotone && held,
        format!(
            "{} steps to T = 1: energy drift {de:.3e} <= 0.01, L2 drift {dl2:.3e} <= 0.02, Linf non-increasing = {monotone}, gamma bitwise = {held}",
            sim.steps
        ),
    );
}

/// Two point vortices and their images in the unit circle, integrated with RK4.
fn four_image_ode(z: [Point; 2], gam: [f64; 2], t: f64, steps: usize) -> Vec<[Point; 2]> {
    let rhs = |z: [Point; 2]| {
        let mut v = [Point::default(); 2];
        for i in 0..2 {
            for j in 0..2 {
                let img = z[j] * (1.0 / z[j].norm_sq());
                let mut add = |src: Point, s: f64| {
                    let d = z[i] - src;
                    v[i] = v[i] + d.perp() * (s / (2.0 * PI * d.norm_sq()));
                };
                if i != j {
                    add(z[j], gam[j]);
                }
                add(img, -gam[j]);
            }
        }
        v
    };
    let dt = t / steps as f64;
    let mut out = vec![z];
    let mut z = z;
    let shift = |z: [Point; 2], k: [Point; 2], s: f64| [z[0] + k[0] * s, z[1] + k[1] * s];
    for _ in 0..steps {
        let k1 = rhs(z);
        let k2 = rhs(shift(z, k1, dt / 2.0));
        let k3 = rhs(shift(z, k2, dt / 2.0));
        let k4 = rhs(shift(z, k3, dt));
        for i in 0..2 {
            z[i] = z[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        out.push(z);
    }
    out
}

#[test]
fn vortex_pair_outside_disk() {
    let z0 = [Point::new(1.6, 0.35), Point::new(1.6, -0.35)];
    let gam = [-1.0, 1.0];
    let cfg = SimConfig {
        method: Method::Particles,
        domain: None,
        obstacle: Some(ExteriorObstacle::Disk { center: Point::default(), radius: 1.0 }),
        initial: InitialVorticity::PointVortices {
            vortices: vec![Particle { pos: z0[0], strength: gam[0] }, Particle { pos: z0[1], strength: gam[1] }],
        },
        gamma: vec![],
        alpha: 0.0,
        resolution: 0,
        spacing: None,
        blob: Some(0.0),
        dt: Some(0.01),
        t_final: 5.0,
        snapshot_every: 10,
        interpolation: Interpolation::default(),
    };
    let run = simulate(&cfg).unwrap().value;
    let oracle = four_image_ode(z0, gam, 5.0, 50_000);
    let mut worst: f64 = 0.0;
    for s in &run.trajectory {
        let Snapshot::Particles { t, ensemble } = s else { panic!("particle run") };
        let k = (t / 5.0 * 50_000.0).round() as usize;
        for i in 0..2 {
            let e = (ensemble.particles[i].pos - oracle[k][i]).norm() / oracle[k][i].norm();
            worst = worst.max(e);
        }
    }
    let end = oracle.last().unwrap();
    verdict(
        "vortex_pair",
        worst <= 0.01,
        format!("max relative position error over T = 5 {worst:.3e} <= 0.01 ({} snapshots, final oracle {:?})", run.trajectory.len(), end[0]),
    );
}

#[test]
fn support_growth() {
    let center = Point::new(1.8, 0.0);
    let rho = 0.4;
    let amp = 2.0;
    let cfg = SimConfig {
        method: Method::Particles,
        domain: None,
        obstacle: Some(ExteriorObstacle::Disk { center: Point::default(), radius: 1.0 }),
        initial: InitialVorticity::RadialBump { center, radius: rho, amplitude: amp },
        gamma: vec![],
        alpha: 0.5,
        resolution: 0,
        spacing: Some(0.05),
        blob: None,
        dt: Some(0.02),
        t_final: 1.0,
        snapshot_every: 0,
        interpolation: Interpolation::default(),
    };
    let run = simulate(&cfg).unwrap().value;
    let rho0 = run.diagnostics[0].support_radius;
    let map = LaurentMap::disk(Point::default(), 1.0).unwrap();
    let l1 = run.diagnostics[0].omega_l1;
    let linf = amp.max(run.diagnostics[0].omega_linf);
    let b = far_field_bound(&map, l1, linf, 1.2, 1.4, f64::INFINITY).unwrap();
    let c_eff = b.c0 + cfg.alpha.abs() * b.c1 / (2.0 * PI);
    let mut worst = f64::NEG_INFINITY;
    for r in &run.diagnostics {
        worst = worst.max(r.support_radius - (rho0 + c_eff * r.t));
    }
    verdict(
        "support_growth",
        worst <= 0.0 && rho0 > 1.4,
        format!(
            "max over {} steps of R(t) - (rho0 + C0_eff t) = {worst:.3e} <= 0 (rho0 {rho0:.3}, C0_eff {c_eff:.3}, final R {:.3})",
            run.diagnostics.len(),
            run.diagnostics.last().unwrap().support_radius
        ),
    );
}

#[test]
fn caratheodory_ellipses_to_slit() {
    let lim = joukowski_map();
    let probes = annulus_probes(2.0, 4.0, 9, 256);
    let mut gaps = Vec::new();
    for n in 1..=8 {
        let t = scaled_joukowski(1.0 + 0.5f64.powi(n)).unwrap();
        gaps.push(caratheodory_gap(&t, &lim, &probes, &[]).unwrap().map);
    }
    let ratio = gaps.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    verdict("caratheodory", ratio <= 0.7, format!("sup |T_n - T| on 2 <= |z| <= 4: {gaps:.4?}, max ratio {ratio:.3} <= 0.7"));
}

#[test]
fn arc_endpoint_exponent() {
    let (jump, report) = arc_flow_study(&ArcConfig::default()).unwrap().value;
    let axis: Vec<f64> = jump.fits.iter().filter(|f| f.direction.y == 0.0).map(|f| f.slope).collect();
    verdict(
        "arc_exponent",
        report.passed() && !axis.is_empty(),
        format!("fitted slopes along the axis rays {axis:.4?} in [-0.6, -0.4], window [{:.4}, {:.2}]", jump.fits[0].window.0, jump.fits[0].window.1),
    );
}

#[test]
fn domain_continuity_rugosity() {
    let start = Instant::now();
    let cfg = ContinuityConfig {
        family: "rugosity".into(),
        alpha: Some(2.0),
        members: vec![2, 4, 8, 16],
        initial: InitialVorticity::RadialBump { center: Point::new(0.0, 0.9), radius: 0.6, amplitude: 4.0 },
        gamma: vec![],
        t_final: 0.5,
        resolution: 256,
        dt: None,
        probe_margin: 4.0,
        final_ratio: 0.3,
        interpolation: Interpolation::default(),
    };
    let r = domain_continuity_study(&cfg).unwrap().value;
    let gaps = r.column("sup_gap").unwrap();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "domain_continuity",
        r.passed() && secs < 900.0,
        format!(
            "eps = 1/2, 1/4, 1/8, 1/16: sup gaps {gaps:.4?}, strictly decreasing = {}, final/initial {:.3} <= 0.3, {secs:.1}s",
            r.checks[0].pass, r.checks[1].value
        ),
    );
}

fn radial_residuals(res: usize) -> (f64, Vec<f64>) {
    let g = disk_domain(res, vec![]);
    let opts = SolveOptions::default();
    let basis = HodgeBasis::build(&g, &opts).unwrap();
    let w0 = g.sample_fluid(|p| (1.0 - (p.norm() / 0.6).powi(2)).max(0.0).powi(3));
    let mut sim = GridSim::new(g, basis, &w0, &[], opts, Interpolation::default()).unwrap();
    let t_final = 0.5;
    let dt = sim.grid.h;
    let steps = (t_final / dt).round() as usize;
    let bumps = Bump::canonical(Point::new(0.15, 0.1), 0.4);
    let mut acc: Vec<ResidualAccumulator> =
        bumps.iter().map(|b| ResidualAccumulator::new(&sim.grid, b, 0.0, steps as f64 * dt).unwrap()).collect();
    for a in &mut acc {
        a.push(&sim.grid, 0.0, &sim.state.u).unwrap();
    }
    for _ in 0..steps {
        sim.step(dt).unwrap();
        for a in &mut acc {
            a.push(&sim.grid, sim.state.t, &sim.state.u).unwrap();
        }
    }
    (sim.grid.h, acc.iter().map(|a| a.value()).collect())
}

#[test]
fn weak_residual_halving() {
    let runs: Vec<(f64, Vec<f64>)> = [64, 128, 256].iter().map(|&r| radial_residuals(r)).collect();
    let mut worst: f64 = 0.0;
    for w in runs.windows(2) {
        for (a, b) in w[0].1.iter().zip(&w[1].1) {
            worst = worst.max(b / a);
        }
    }
    let table: Vec<String> = runs
        .iter()
        .map(|(h, r)| format!("h={h:.4}: [{}]", r.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")))
        .collect();
    verdict("weak_residual", worst <= 0.6, format!("{}; max ratio per halving {worst:.3} <= 0.6", table.join("; ")));
}

