//! Run configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use blockage_core::diffraction::LossModelKind;
use blockage_core::geometry::Vec3;
use blockage_core::linkeval::{ArrayConfig, LinkBudget};
use blockage_core::obstacles::{MobilityModel, Obstacle, ObstacleShape};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A loss model as written in configs: `obstruction`, `obstruction(15)`,
/// `metis`, `dked`, `dked_pc` or `itu_se`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModelSpec(pub LossModelKind);

pub const DEFAULT_OBSTRUCTION_DB: f64 = 10.0;

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let kind = match s.to_ascii_lowercase().as_str() {
            "obstruction" => LossModelKind::Obstruction(DEFAULT_OBSTRUCTION_DB),
            "metis" => LossModelKind::Metis,
            "dked" => LossModelKind::Dked,
            "dked_pc" | "dked+pc" => LossModelKind::DkedPc,
            "itu_se" | "itu" => LossModelKind::ItuSe,
            other => {
                let loss = other
                    .strip_prefix("obstruction(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| format!("unknown loss model {s:?}"))?;
                LossModelKind::Obstruction(loss)
            }
        };
        kind.validate().map_err(|e| e.to_string())?;
        Ok(ModelSpec(kind))
    }
}

impl TryFrom<String> for ModelSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ModelSpec> for String {
    fn from(m: ModelSpec) -> String {
        m.to_string()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            LossModelKind::Obstruction(l) if l == DEFAULT_OBSTRUCTION_DB => f.write_str("obstruction"),
            LossModelKind::Obstruction(l) => write!(f, "obstruction({l})"),
            other => f.write_str(other.name()),
        }
    }
}

impl ModelSpec {
    /// Column suffix used in CSV headers.
    pub fn column(&self) -> String {
        match self.0 {
            LossModelKind::Obstruction(l) if l == DEFAULT_OBSTRUCTION_DB => "obstruction".into(),
            LossModelKind::Obstruction(l) => format!("obstruction_{l}"),
            other => other.name().into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Screen,
    OrthoScreen,
    Sphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MobilitySpec {
    Static { position: [f64; 3] },
    Linear { start: [f64; 3], velocity: [f64; 3] },
    /// `[time, x, y, z]` rows.
    Waypoints { points: Vec<[f64; 4]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub shape: ShapeKind,
    /// `[width, height]` for screens, `[radius]` for spheres.
    pub dimensions: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuth_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevation_deg: Option<f64>,
    pub mobility: MobilitySpec,
    pub model: ModelSpec,
    /// Diffraction distance threshold, m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Constant obstruction for secondary rays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_loss_db: Option<f64>,
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ObstacleSpec {
    fn mobility(&self) -> MobilityModel {
        match &self.mobility {
            MobilitySpec::Static { position } => MobilityModel::Static(v3(*position)),
            MobilitySpec::Linear { start, velocity } => MobilityModel::Linear {
                start: v3(*start),
                velocity: v3(*velocity),
            },
            MobilitySpec::Waypoints { points } => MobilityModel::Waypoints(
                points.iter().map(|p| (p[0], Vec3::new(p[1], p[2], p[3]))).collect(),
            ),
        }
    }

    fn shape(&self) -> Result<ObstacleShape, String> {
        let dims = |n: usize| {
            if self.dimensions.len() == n {
                Ok(())
            } else {
                Err(format!("{:?} takes {n} dimension(s), got {}", self.shape, self.dimensions.len()))
            }
        };
        let angles_unused = || {
            if self.azimuth_deg.is_some() || self.elevation_deg.is_some() {
                Err(format!("{:?} has no orientation", self.shape))
            } else {
                Ok(())
            }
        };
        Ok(match self.shape {
            ShapeKind::Screen => {
                dims(2)?;
                ObstacleShape::Screen {
                    width: self.dimensions[0],
                    height: self.dimensions[1],
                    azimuth: self.azimuth_deg.unwrap_or(0.0).to_radians(),
                    elevation: self.elevation_deg.unwrap_or(0.0).to_radians(),
                }
            }
            ShapeKind::OrthoScreen => {
                dims(2)?;
                angles_unused()?;
                ObstacleShape::OrthoScreen {
                    width: self.dimensions[0],
                    height: self.dimensions[1],
                }
            }
            ShapeKind::Sphere => {
                dims(1)?;
                angles_unused()?;
                ObstacleShape::Sphere {
                    radius: self.dimensions[0],
                }
            }
        })
    }

    /// Build the obstacle, optionally replacing its loss model.
    pub fn build(&self, model: Option<LossModelKind>) -> Result<Obstacle, String> {
        let mut o = Obstacle::new(self.shape()?, self.mobility(), model.unwrap_or(self.model.0)).map_err(|e| e.to_string())?;
        if let Some(t) = self.threshold {
            o = o.with_distance_threshold(t).map_err(|e| e.to_string())?;
        }
        match (self.fallback, self.fallback_loss_db) {
            (Some(true), l) => {
                o = o
                    .with_obstruction_fallback(l.unwrap_or(blockage_core::obstacles::DEFAULT_FALLBACK_LOSS_DB))
                    .map_err(|e| e.to_string())?;
            }
            (_, Some(_)) => return Err("fallback_loss_db requires fallback = true".into()),
            _ => {}
        }
        Ok(o)
    }

    /// The model used when comparing against `model`: spheres keep their own.
    pub fn comparison_model(&self, model: LossModelKind) -> Option<LossModelKind> {
        (self.shape != ShapeKind::Sphere || !model.is_diffraction()).then_some(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "half")]
    pub spacing: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudgetSpec {
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    pub tx_power: f64,
    pub noise_figure: f64,
    pub tx_array: ArraySpec,
    pub rx_array: ArraySpec,
}

impl Default for LinkBudgetSpec {
    fn default() -> Self {
        LinkBudget::default().into()
    }
}

impl From<LinkBudget> for LinkBudgetSpec {
    fn from(b: LinkBudget) -> Self {
        let a = |a: ArrayConfig| ArraySpec {
            rows: a.rows,
            cols: a.cols,
            spacing: a.spacing,
        };
        LinkBudgetSpec {
            carrier_frequency: b.carrier_frequency,
            bandwidth: b.bandwidth,
            tx_power: b.tx_power,
            noise_figure: b.noise_figure,
            tx_array: a(b.tx_array),
            rx_array: a(b.rx_array),
        }
    }
}

impl LinkBudgetSpec {
    pub fn budget(&self) -> LinkBudget {
        let a = |a: ArraySpec| ArrayConfig {
            rows: a.rows,
            cols: a.cols,
            spacing: a.spacing,
        };
        LinkBudget {
            carrier_frequency: self.carrier_frequency,
            bandwidth: self.bandwidth,
            tx_power: self.tx_power,
            noise_figure: self.noise_figure,
            tx_array: a(self.tx_array),
            rx_array: a(self.rx_array),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// Trace sampling period, s; overrides the scenario's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_step: Option<f64>,
    /// Process only the first `num_steps` steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub scenario_dir: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models_to_compare: Vec<ModelSpec>,
    /// Rays weaker than this after attenuation are removed, dB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removal_floor: Option<f64>,
    /// Fail with a numeric error when more losses than this were capped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_clamp_events: Option<u64>,
    #[serde(default)]
    pub sampling: SamplingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_budget: Option<LinkBudgetSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub obstacles: Vec<ObstacleSpec>,
}

impl RunSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: RunSpec = toml::from_str(text).map_err(|e| Error::config(e.message().trim()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Read `path`; relative directories are taken relative to its folder.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for dir in [&mut spec.scenario_dir, &mut spec.output_dir] {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run spec serializes")
    }

    pub fn budget(&self) -> LinkBudget {
        self.link_budget.unwrap_or_default().budget()
    }

    /// Obstacles with their configured models, or all switched to `model`.
    pub fn build_obstacles(&self, model: Option<LossModelKind>) -> Result<Vec<Obstacle>> {
        self.obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let m = model.and_then(|m| o.comparison_model(m));
                o.build(m).map_err(|e| Error::config(format!("obstacle {i}: {e}")))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.budget().validate().map_err(Error::config)?;
        if let Some(f) = self.removal_floor {
            if !f.is_finite() {
                return Err(Error::config("removal_floor must be finite"));
            }
        }
        if let Some(t) = self.sampling.time_step {
            if !t.is_finite() || t <= 0.0 {
                return Err(Error::config("sampling.time_step must be > 0"));
            }
        }
        if self.sampling.num_steps == Some(0) {
            return Err(Error::config("sampling.num_steps must be >= 1"));
        }
        self.build_obstacles(None)?;
        for m in &self.models_to_compare {
            self.build_obstacles(Some(m.0))
                .map_err(|e| Error::config(format!("model {m}: {e}")))?;
        }
        Ok(())
    }
}
