use std::fmt;

use serde::{Deserialize, Serialize};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty compact set")]
    EmptySet,
    #[error("domain not contained in box: {0}")]
    NotContained(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unknown family id `{0}`")]
    UnknownFamily(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("harmonic measures require bounded domain")]
    ExteriorDomain,
    #[error("zero-capacity obstacle suspected (condition number {condition:.3e})")]
    SingularGram { condition: f64 },
    #[error("circulation count {got} does not match obstacle count {expected}")]
    CirculationCount { expected: usize, got: usize },
    #[error("cutoff support of obstacle {obstacle} touches another boundary component")]
    OverlappingCutoff { obstacle: usize },
    #[error("test field support touches solid nodes")]
    TestSupport,
    #[error("Lq norm requires q >= 1, got {0}")]
    BadExponent(f64),
    #[error("CFL number {cfl:.3} exceeds limit {limit}")]
    Cfl { cfl: f64, limit: f64 },
    #[error("point {0:?} lies inside the obstacle")]
    InsideObstacle((f64, f64)),
    #[error("evaluation point coincides with a particle and blob radius is zero")]
    Coincident,
    #[error("conformal fit defect {defect:.3e} above threshold {threshold:.1e}")]
    FitDefect { defect: f64, threshold: f64 },
    #[error("bound requires p > 2, got {0}")]
    ExponentTooSmall(f64),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("format error: {0}")]
    Format(String),
}

/// Non-fatal conditions reported alongside results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    UnderResolvedObstacle { obstacle: usize, thickness: f64, spacing: f64 },
    EmptyObstacle { obstacle: usize },
    SverakViolated { max_components: usize, bound: usize },
    NoObstacleInWindow,
    BacktraceClamped { count: usize },
    Note { message: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UnderResolvedObstacle { obstacle, thickness, spacing } => write!(
                f,
                "under-resolved obstacle {obstacle}: thickness {thickness:.3e} below 2h = {:.3e}",
                2.0 * spacing
            ),
            Warning::EmptyObstacle { obstacle } => {
                write!(f, "obstacle {obstacle} has no solid nodes (zero-capacity proxy)")
            }
            Warning::SverakViolated { max_components, bound } => write!(
                f,
                "Sverak hypothesis violated: {max_components} complement components exceed bound {bound}"
            ),
            Warning::NoObstacleInWindow => write!(f, "no obstacle in Poincaré window"),
            Warning::BacktraceClamped { count } => {
                write!(f, "{count} backtraces clamped to the fluid region")
            }
            Warning::Note { message } => f.write_str(message),
        }
    }
}

/// A value together with the warnings produced while computing it.
#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Outcome<T> {
    pub fn new(value: T) -> Self {
        Self { value, warnings: Vec::new() }
    }

    pub fn with_warnings(value: T, warnings: Vec<Warning>) -> Self {
        Self { value, warnings }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        Outcome { value: f(self.value), warnings: self.warnings }
    }
}
