//! Configs of the subcommands that have no core counterpart, and built-in study defaults.

use roughflow::experiments::{ArcConfig, ContinuityConfig, DichotomyConfig, GammaConfig};
use roughflow::geometry::Point;
use roughflow::transport::{DomainSource, ExteriorObstacle, InitialVorticity, Interpolation};
use serde::{Deserialize, Serialize};

fn default_resolution() -> usize {
    256
}

/// `capacity` input: a bounded domain and a resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub domain: DomainSource,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_r_min() -> f64 {
    2.0
}
fn default_r_max() -> f64 {
    4.0
}
fn default_samples() -> usize {
    512
}

/// `conformal` input: the obstacle whose map is written and optional approximants
/// compared with it on the annulus `r_min ≤ |z| ≤ r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalConfig {
    pub obstacle: ExteriorObstacle,
    #[serde(default)]
    pub compare: Vec<ExteriorObstacle>,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    /// Boundary points written to `boundary.csv`.
    #[serde(default = "default_samples")]
    pub boundary_samples: usize,
}

impl ConformalConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.r_min > 0.0 && self.r_max >= self.r_min && self.r_max.is_finite()) {
            return Err("need 0 < r_min <= r_max".into());
        }
        if self.boundary_samples < 3 {
            return Err("need at least 3 boundary samples".into());
        }
        Ok(())
    }
}

/// Rugosity run at res 256 with a bump centred in the channel.
pub fn default_continuity() -> ContinuityConfig {
    ContinuityConfig {
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
    }
}

pub fn default_gamma() -> GammaConfig {
    GammaConfig { family: "thicken_arc".into(), alpha: None, n_max: 6, f: 1.0, resolutions: vec![256], final_ratio: 0.25 }
}

pub fn default_dichotomy() -> DichotomyConfig {
    DichotomyConfig::default()
}

pub fn default_arc() -> ArcConfig {
    ArcConfig::default()
}
