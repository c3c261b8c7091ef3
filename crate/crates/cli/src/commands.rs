use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use roughflow::conformal::{annulus_probes, caratheodory_gap};
use roughflow::elliptic::{capacity, discretize, HodgeBasis, MaskedGrid, SolveOptions};
use roughflow::experiments::{
    arc_flow_study, capacity_dichotomy_study, domain_continuity_study, gamma_dirichlet_study, ArcConfig, ContinuityConfig,
    DichotomyConfig, GammaConfig, StudyReport, ARC_LENGTH,
};
use roughflow::geometry::Family;
use roughflow::io;
use roughflow::transport::{drive, DiagnosticsRow, Method, RunObserver, SimConfig, Simulator, Snapshot};
use roughflow::Warning;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::configs::{default_arc, default_continuity, default_dichotomy, default_gamma, CapacityConfig, ConformalConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{config_hash, Manifest};
use crate::{Cli, Command, Common, ConfigKind, StudyKind};

pub fn run(cli: &Cli) -> CliResult<()> {
    let jobs = cli.common.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    if jobs == 0 {
        return Err(CliError::Validation("--jobs must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().map_err(CliError::runtime)?;
    let start = Instant::now();
    let c = &cli.common;
    match &cli.command {
        Command::Simulate { config } => simulate(c, load(config)?, start, jobs),
        Command::Capacity { config } => capacity_cmd(c, load(config)?, start, jobs),
        Command::Gamma { config } => {
            let cfg = gamma_overrides(load(config)?, c, None, None);
            study_cmd(c, "gamma", &cfg, start, jobs, || gamma_dirichlet_study(&cfg))
        }
        Command::Conformal { config } => conformal_cmd(c, load(config)?, start, jobs),
        Command::Study { kind, config, family, alpha } => study(c, *kind, config.as_deref(), family.clone(), *alpha, start, jobs),
        Command::Validate { kind, config } => validate(*kind, config),
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn geometry_warning(w: &Warning) -> bool {
    matches!(w, Warning::UnderResolvedObstacle { .. } | Warning::EmptyObstacle { .. })
}

fn strict_check(c: &Common, warnings: &[Warning]) -> CliResult<()> {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if c.strict {
        if let Some(w) = warnings.iter().find(|w| geometry_warning(w)) {
            return Err(CliError::Validation(format!("--strict: {w}")));
        }
    }
    Ok(())
}

/// Output directory with the list of files written so far.
struct Out {
    dir: Option<PathBuf>,
    files: Vec<String>,
}

impl Out {
    fn new(c: &Common) -> CliResult<Out> {
        if let Some(d) = &c.out {
            std::fs::create_dir_all(d).map_err(|e| CliError::Runtime(format!("{}: {e}", d.display())))?;
        }
        Ok(Out { dir: c.out.clone(), files: vec![] })
    }

    fn create(&mut self, rel: &str) -> CliResult<Option<BufWriter<File>>> {
        let Some(d) = &self.dir else { return Ok(None) };
        let p = d.join(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(CliError::runtime)?;
        }
        let f = File::create(&p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
        self.files.push(rel.into());
        Ok(Some(BufWriter::new(f)))
    }

    fn text(&mut self, rel: &str, s: &str) -> CliResult<()> {
        if let Some(mut w) = self.create(rel)? {
            w.write_all(s.as_bytes()).map_err(CliError::runtime)?;
            w.flush().map_err(CliError::runtime)?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, v: &T) -> CliResult<()> {
        let s = serde_json::to_string_pretty(v).map_err(CliError::runtime)?;
        self.text(rel, &(s + "\n"))
    }

    fn report(&mut self, r: &StudyReport) -> CliResult<()> {
        if let Some(mut w) = self.create("report.csv")? {
            r.write_csv(&mut w)?;
            w.flush().map_err(CliError::runtime)?;
        }
        self.json("report.json", r)
    }

    fn finish<T: Serialize>(self, c: &Common, command: &str, cfg: &T, warnings: &[Warning], start: Instant, jobs: usize) -> CliResult<()> {
        let Some(dir) = self.dir.clone() else { return Ok(()) };
        let config = serde_json::to_value(cfg).map_err(CliError::runtime)?;
        let m = Manifest {
            command: command.into(),
            argv: std::env::args().collect(),
            config_sha256: config_hash(&config),
            config,
            seed: c.seed,
            jobs,
            strict: c.strict,
            versions: Manifest::versions(),
            wall_time_s: start.elapsed().as_secs_f64(),
            outputs: self.files,
            warnings: warnings.iter().map(ToString::to_string).collect(),
        };
        m.write(&dir)
    }
}

/// Streams diagnostics rows and snapshot files during a run.
struct FileObserver<'a> {
    out: &'a mut Out,
    csv: Option<BufWriter<File>>,
    grid: Option<MaskedGrid>,
    rows: usize,
    last: Option<DiagnosticsRow>,
    snapshots: usize,
}

/// Sidecar of a particle snapshot.
#[derive(Serialize)]
struct ParticleMeta {
    t: f64,
    alpha: f64,
    blob: f64,
    particles: usize,
    total_strength: f64,
}

impl RunObserver for FileObserver<'_> {
    fn row(&mut self, row: &DiagnosticsRow) -> roughflow::Result<()> {
        if let Some(w) = &mut self.csv {
            if self.rows == 0 {
                writeln!(w, "{}", row.csv_header())?;
            }
            writeln!(w, "{}", row.csv_line())?;
        }
        self.rows += 1;
        self.last = Some(row.clone());
        Ok(())
    }

    fn snapshot(&mut self, snap: &Snapshot) -> roughflow::Result<()> {
        self.snapshots += 1;
        let Some(dir) = self.out.dir.clone() else { return Ok(()) };
        let step = self.rows.saturating_sub(1);
        let stem = format!("snap_{step:06}");
        let sub = dir.join("snapshots");
        std::fs::create_dir_all(&sub)?;
        match snap {
            Snapshot::Grid(s) => {
                let g = self.grid.as_ref().expect("grid run has a grid");
                io::write_snapshot(&sub, &stem, g, s)?;
                self.out.files.push(format!("snapshots/{stem}.bin"));
            }
            Snapshot::Particles { t, ensemble } => {
                let mut w = BufWriter::new(File::create(sub.join(format!("{stem}.csv")))?);
                io::write_ensemble_csv(&mut w, ensemble)?;
                w.flush()?;
                let meta = ParticleMeta {
                    t: *t,
                    alpha: ensemble.alpha,
                    blob: ensemble.blob,
                    particles: ensemble.particles.len(),
                    total_strength: ensemble.total_strength(),
                };
                std::fs::write(sub.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
                self.out.files.push(format!("snapshots/{stem}.csv"));
            }
        }
        self.out.files.push(format!("snapshots/{stem}.json"));
        Ok(())
    }
}

fn simulate(c: &Common, mut cfg: SimConfig, start: Instant, jobs: usize) -> CliResult<()> {
    if let Some(r) = c.res {
        cfg.resolution = r;
    }
    let built = Simulator::build(&cfg, &SolveOptions::default())?;
    strict_check(c, &built.warnings)?;
    let mut warnings = built.warnings;
    let mut sim = built.value;
    let mut out = Out::new(c)?;
    let csv = out.create("diagnostics.csv")?;
    let grid = match &sim {
        Simulator::Grid(g) => Some(g.grid.clone()),
        Simulator::Particles(_) => None,
    };
    let mut obs = FileObserver { out: &mut out, csv, grid, rows: 0, last: None, snapshots: 0 };
    let run_warnings = drive(&mut sim, &cfg, &mut obs).map_err(CliError::runtime)?;
    if let Some(w) = &mut obs.csv {
        w.flush().map_err(CliError::runtime)?;
    }
    let clamped: usize = run_warnings
        .iter()
        .map(|w| if let Warning::BacktraceClamped { count } = w { *count } else { 0 })
        .sum();
    if clamped > 0 {
        let w = Warning::BacktraceClamped { count: clamped };
        eprintln!("warning: {w}");
        warnings.push(w);
    }
    let last = obs.last.clone().expect("drive reports the initial row");
    println!(
        "{} run: {} steps to t = {}, {} snapshots, energy {:.6e}, |omega|_inf {:.6e}, support radius {:.4}",
        match cfg.method {
            Method::Grid => "grid",
            Method::Particles => "particle",
        },
        obs.rows - 1,
        last.t,
        obs.snapshots,
        last.energy,
        last.omega_linf,
        last.support_radius
    );
    out.finish(c, "simulate", &cfg, &warnings, start, jobs)
}

#[derive(Serialize)]
struct CapacitySummary {
    resolution: usize,
    h: f64,
    obstacles: usize,
    capacities: Vec<f64>,
}

fn capacity_cmd(c: &Common, mut cfg: CapacityConfig, start: Instant, jobs: usize) -> CliResult<()> {
    if let Some(r) = c.res {
        cfg.resolution = r;
    }
    let spec = cfg.domain.spec()?;
    spec.validate()?;
    let grid = discretize(&spec, cfg.resolution)?;
    strict_check(c, &grid.warnings)?;
    let g = grid.value;
    let opts = SolveOptions::default();
    let mut warnings = grid.warnings;
    let mut caps = Vec::with_capacity(g.obstacles);
    for i in 0..g.obstacles {
        let r = capacity(&g, i, &opts).map_err(CliError::runtime)?;
        warnings.extend(r.warnings);
        println!("capacity[{i}] = {:.6}", r.value);
        caps.push(r.value);
    }
    let mut out = Out::new(c)?;
    if g.bounded && g.obstacles > 0 {
        let basis = HodgeBasis::build(&g, &opts).map_err(CliError::runtime)?;
        for (name, m) in [("P.csv", &basis.p), ("C.csv", &basis.c)] {
            if let Some(mut w) = out.create(name)? {
                io::write_matrix_csv(&mut w, m)?;
                w.flush().map_err(CliError::runtime)?;
            }
        }
    }
    out.json("capacity.json", &CapacitySummary { resolution: cfg.resolution, h: g.h, obstacles: g.obstacles, capacities: caps })?;
    out.finish(c, "capacity", &cfg, &warnings, start, jobs)
}

fn conformal_cmd(c: &Common, cfg: ConformalConfig, start: Instant, jobs: usize) -> CliResult<()> {
    cfg.validate().map_err(CliError::Validation)?;
    let map = cfg.obstacle.map()?;
    println!("beta = {:.12}, defect = {:.3e}, terms = {}", map.beta, map.defect, map.terms());
    let mut out = Out::new(c)?;
    out.text("map.json", &(io::map_to_json(&map)? + "\n"))?;
    let mut csv = String::from("x,y\n");
    for p in map.boundary(cfg.boundary_samples) {
        csv.push_str(&format!("{},{}\n", p.x, p.y));
    }
    out.text("boundary.csv", &csv)?;
    if !cfg.compare.is_empty() {
        let probes = annulus_probes(cfg.r_min, cfg.r_max, 9, 256);
        let mut table = String::from("index,map_gap,deriv_gap\n");
        for (k, o) in cfg.compare.iter().enumerate() {
            let gap = caratheodory_gap(&o.map()?, &map, &probes, &[]).map_err(CliError::runtime)?;
            println!("compare[{k}]: sup |T_k - T| = {:.6e}, sup |T_k' - T'| = {:.6e}", gap.map, gap.deriv);
            table.push_str(&format!("{k},{},{}\n", gap.map, gap.deriv));
        }
        out.text("caratheodory.csv", &table)?;
    }
    out.finish(c, "conformal", &cfg, &[], start, jobs)
}

fn gamma_overrides(mut cfg: GammaConfig, c: &Common, family: Option<String>, alpha: Option<f64>) -> GammaConfig {
    if let Some(r) = c.res {
        cfg.resolutions = vec![r];
    }
    if let Some(f) = family {
        cfg.family = f;
    }
    if alpha.is_some() {
        cfg.alpha = alpha;
    }
    cfg
}

fn study_cmd<T: Serialize>(
    c: &Common,
    name: &str,
    cfg: &T,
    start: Instant,
    jobs: usize,
    run: impl FnOnce() -> roughflow::Result<roughflow::Outcome<StudyReport>>,
) -> CliResult<()> {
    let r = run()?;
    strict_check(c, &r.warnings)?;
    let report = r.value;
    print_report(&report);
    let mut out = Out::new(c)?;
    out.report(&report)?;
    out.finish(c, &format!("study {name}"), cfg, &r.warnings, start, jobs)
}

fn print_report(r: &StudyReport) {
    println!("{}", r.columns.join(","));
    for row in &r.rows {
        println!("{}", row.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(","));
    }
    for ch in &r.checks {
        println!("{} {}: {:.6e} (threshold {})", if ch.pass { "PASS" } else { "FAIL" }, ch.name, ch.value, ch.threshold);
    }
}

fn or_default<T: DeserializeOwned>(path: Option<&Path>, d: impl FnOnce() -> T) -> CliResult<T> {
    path.map_or_else(|| Ok(d()), load)
}

fn study(
    c: &Common,
    kind: StudyKind,
    config: Option<&Path>,
    family: Option<String>,
    alpha: Option<f64>,
    start: Instant,
    jobs: usize,
) -> CliResult<()> {
    if (family.is_some() || alpha.is_some()) && !matches!(kind, StudyKind::DomainContinuity | StudyKind::Gamma) {
        return Err(CliError::Validation("--family and --alpha apply to domain-continuity and gamma".into()));
    }
    match kind {
        StudyKind::DomainContinuity => {
            let mut cfg: ContinuityConfig = or_default(config, default_continuity)?;
            if let Some(r) = c.res {
                cfg.resolution = r;
            }
            if let Some(f) = family {
                cfg.family = f;
            }
            if alpha.is_some() {
                cfg.alpha = alpha;
            }
            study_cmd(c, "domain-continuity", &cfg, start, jobs, || domain_continuity_study(&cfg))
        }
        StudyKind::CapacityDichotomy => {
            let mut cfg: DichotomyConfig = or_default(config, default_dichotomy)?;
            if let Some(r) = c.res {
                cfg.max_res = r;
                cfg.min_res = cfg.min_res.min(r);
            }
            study_cmd(c, "capacity-dichotomy", &cfg, start, jobs, || capacity_dichotomy_study(&cfg))
        }
        StudyKind::ArcFlow => {
            let mut cfg: ArcConfig = or_default(config, default_arc)?;
            if let Some(r) = c.res {
                cfg.h = ARC_LENGTH / r as f64;
            }
            let r = arc_flow_study(&cfg)?;
            strict_check(c, &r.warnings)?;
            let (jump, report) = r.value;
            print_report(&report);
            let mut out = Out::new(c)?;
            out.report(&report)?;
            let mut csv = String::from("s,jump\n");
            for (s, j) in jump.s.iter().zip(&jump.jump) {
                csv.push_str(&format!("{s},{j}\n"));
            }
            out.text("jump.csv", &csv)?;
            out.finish(c, "study arc-flow", &cfg, &r.warnings, start, jobs)
        }
        StudyKind::Gamma => {
            let cfg = gamma_overrides(or_default(config, default_gamma)?, c, family, alpha);
            study_cmd(c, "gamma", &cfg, start, jobs, || gamma_dirichlet_study(&cfg))
        }
    }
}

fn print_resolved<T: Serialize>(cfg: &T) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(cfg).map_err(CliError::runtime)?);
    Ok(())
}

fn family_ok(id: &str, alpha: Option<f64>) -> CliResult<()> {
    Family::parse(id, alpha)?;
    Ok(())
}

/// Parses and checks a config without computing anything.
fn validate(kind: ConfigKind, path: &Path) -> CliResult<()> {
    match kind {
        ConfigKind::Simulate => {
            let cfg: SimConfig = load(path)?;
            cfg.validate()?;
            if let Some(d) = &cfg.domain {
                d.spec()?.validate()?;
            }
            if let Some(o) = &cfg.obstacle {
                o.map()?;
            }
            print_resolved(&cfg)
        }
        ConfigKind::Capacity => {
            let cfg: CapacityConfig = load(path)?;
            cfg.domain.spec()?.validate()?;
            if cfg.resolution < 16 {
                return Err(CliError::Validation("resolution must be at least 16".into()));
            }
            print_resolved(&cfg)
        }
        ConfigKind::Conformal => {
            let cfg: ConformalConfig = load(path)?;
            cfg.validate().map_err(CliError::Validation)?;
            print_resolved(&cfg)
        }
        ConfigKind::Gamma => {
            let cfg: GammaConfig = load(path)?;
            family_ok(&cfg.family, cfg.alpha)?;
            print_resolved(&cfg)
        }
        ConfigKind::DomainContinuity => {
            let cfg: ContinuityConfig = load(path)?;
            family_ok(&cfg.family, cfg.alpha)?;
            print_resolved(&cfg)
        }
        ConfigKind::CapacityDichotomy => print_resolved(&load::<DichotomyConfig>(path)?),
        ConfigKind::ArcFlow => print_resolved(&load::<ArcConfig>(path)?),
    }
}
