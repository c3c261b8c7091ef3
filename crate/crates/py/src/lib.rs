//! Python bindings. Configs go in as JSON text; structured results come back as
//! Python objects decoded from JSON.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use roughflow::conformal::{biot_savart_exterior, Particle, VortexEnsemble};
use roughflow::elliptic::{capacity, discretize, SolveOptions};
use roughflow::experiments::{
    arc_flow_study, capacity_dichotomy_study, domain_continuity_study, gamma_dirichlet_study, ArcConfig, ContinuityConfig,
    DichotomyConfig, GammaConfig,
};
use roughflow::transport::{simulate as run_sim, DomainSource, ExteriorObstacle, SimConfig};
use roughflow::{io, Point};
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(roughflow_py, RoughflowError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    RoughflowError::new_err(e.to_string())
}

fn parse<T: DeserializeOwned>(s: &str) -> PyResult<T> {
    serde_json::from_str(s).map_err(err)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (s,))
}

#[pyfunction]
fn version() -> &'static str {
    roughflow::VERSION
}

/// Capacity of every obstacle of a bounded domain (`DomainSource` JSON).
#[pyfunction]
#[pyo3(signature = (domain_json, resolution = 256))]
fn capacities(domain_json: &str, resolution: usize) -> PyResult<Vec<f64>> {
    let spec = parse::<DomainSource>(domain_json)?.spec().map_err(err)?;
    let g = discretize(&spec, resolution).map_err(err)?.value;
    let opts = SolveOptions::default();
    (0..g.obstacles).map(|i| capacity(&g, i, &opts).map(|o| o.value).map_err(err)).collect()
}

/// Runs a simulation config; returns `{"diagnostics": [...], "times": [...]}`.
#[pyfunction]
fn simulate<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg: SimConfig = parse(config_json)?;
    let run = run_sim(&cfg).map_err(err)?;
    let times: Vec<f64> = run.value.trajectory.iter().map(|s| s.t()).collect();
    let warnings: Vec<String> = run.warnings.iter().map(ToString::to_string).collect();
    to_py(py, &serde_json::json!({"diagnostics": run.value.diagnostics, "times": times, "warnings": warnings}))
}

/// Runs a study (`domain_continuity`, `capacity_dichotomy`, `arc_flow`, `gamma`); returns the report.
#[pyfunction]
#[pyo3(signature = (kind, config_json = "{}"))]
fn study<'py>(py: Python<'py>, kind: &str, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let report = match kind {
        "domain_continuity" => domain_continuity_study(&parse::<ContinuityConfig>(config_json)?),
        "capacity_dichotomy" => capacity_dichotomy_study(&parse::<DichotomyConfig>(config_json)?),
        "gamma" => gamma_dirichlet_study(&parse::<GammaConfig>(config_json)?),
        "arc_flow" => arc_flow_study(&parse::<ArcConfig>(config_json)?).map(|o| roughflow::Outcome::with_warnings(o.value.1, o.warnings)),
        k => return Err(err(format!("unknown study `{k}`"))),
    }
    .map_err(err)?;
    to_py(py, &report.value)
}

/// Exterior map of an obstacle (`ExteriorObstacle` JSON) as a dict.
#[pyfunction]
fn exterior_map<'py>(py: Python<'py>, obstacle_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let map = parse::<ExteriorObstacle>(obstacle_json)?.map().map_err(err)?;
    to_py(py, &map)
}

/// Velocity at `(x, y)` of point vortices `(x, y, gamma)` plus harmonic part `alpha`.
#[pyfunction]
#[pyo3(signature = (obstacle_json, particles, alpha, x, y, blob = 0.0))]
fn exterior_velocity(obstacle_json: &str, particles: Vec<(f64, f64, f64)>, alpha: f64, x: f64, y: f64, blob: f64) -> PyResult<(f64, f64)> {
    let map = parse::<ExteriorObstacle>(obstacle_json)?.map().map_err(err)?;
    let parts = particles.into_iter().map(|(px, py, s)| Particle { pos: Point::new(px, py), strength: s }).collect();
    let ens = VortexEnsemble::new(parts, alpha, blob);
    let v = biot_savart_exterior(&map, &ens, Point::new(x, y)).map_err(err)?;
    Ok((v.x, v.y))
}

/// Reads a field file: grid metadata, node codes and named components.
#[pyfunction]
fn read_field<'py>(py: Python<'py>, path: &str) -> PyResult<Bound<'py, PyAny>> {
    let f = std::fs::File::open(path).map_err(err)?;
    let file = io::read_fields(std::io::BufReader::new(f)).map_err(err)?;
    let g = &file.grid;
    let mask: Vec<u32> = g.nodes.iter().map(|&n| io::node_code(n)).collect();
    let comps: serde_json::Map<String, serde_json::Value> =
        file.components.iter().map(|(n, v)| (n.clone(), serde_json::json!(v))).collect();
    to_py(
        py,
        &serde_json::json!({"nx": g.nx, "ny": g.ny, "x0": g.x0, "y0": g.y0, "h": g.h,
            "obstacles": g.obstacles, "bounded": g.bounded, "mask": mask, "components": comps}),
    )
}

#[pymodule]
fn roughflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RoughflowError", m.py().get_type::<RoughflowError>())?;
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add_function(wrap_pyfunction!(capacities, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(study, m)?)?;
    m.add_function(wrap_pyfunction!(exterior_map, m)?)?;
    m.add_function(wrap_pyfunction!(exterior_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(read_field, m)?)?;
    Ok(())
}
