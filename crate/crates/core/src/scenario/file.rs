//! Scenario files (JSON) and their loaded form.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::procedural::{box_mesh, boxes_mesh, engine_surrogate};
use super::{index_mesh, CraneSpec, Trial};
use crate::collision::{vec3_array, MeshIndex, TriMesh};
use crate::kinematics::{Pose, RobotModel};
use crate::reachability::StepSchedule;
use crate::{Error, Result, Vec3};

/// Geometry source for the workpiece or an obstacle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ShapeSpec {
    /// STL or OBJ file, relative to the scenario file.
    Mesh { path: PathBuf },
    #[serde(rename_all = "camelCase")]
    Box {
        #[serde(with = "vec3_array", default = "Vec3::zeros")]
        center: Vec3,
        #[serde(with = "vec3_array")]
        half_extents: Vec3,
    },
    Boxes { boxes: Vec<BoxPart> },
    EngineSurrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoxPart {
    #[serde(with = "vec3_array")]
    pub center: Vec3,
    #[serde(with = "vec3_array")]
    pub half_extents: Vec3,
}

impl ShapeSpec {
    pub fn to_mesh(&self, base_dir: &Path) -> Result<TriMesh> {
        match self {
            ShapeSpec::Mesh { path } => TriMesh::load(base_dir.join(path)),
            ShapeSpec::Box {
                center,
                half_extents,
            } => {
                if half_extents.iter().any(|h| !(*h > 0.0)) {
                    return Err(Error::invalid("box half extents must be positive"));
                }
                Ok(box_mesh(*center, *half_extents))
            }
            ShapeSpec::Boxes { boxes } => {
                if boxes.iter().any(|b| b.half_extents.iter().any(|h| !(*h > 0.0))) {
                    return Err(Error::invalid("box half extents must be positive"));
                }
                Ok(boxes_mesh(
                    &boxes
                        .iter()
                        .map(|b| (b.center, b.half_extents))
                        .collect::<Vec<_>>(),
                ))
            }
            ShapeSpec::EngineSurrogate => Ok(engine_surrogate()),
        }
    }
}

/// Axis-aligned world region, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    #[serde(with = "vec3_array")]
    pub min: Vec3,
    #[serde(with = "vec3_array")]
    pub max: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridParams {
    #[serde(default = "default_cell")]
    pub voxel_size: f64,
    #[serde(default = "default_band")]
    pub band: f64,
    /// When set, a fixed world grid over this region with every voxel
    /// active replaces the band around the workpiece.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
}

fn default_cell() -> f64 {
    0.05
}

fn default_band() -> f64 {
    0.05
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            voxel_size: default_cell(),
            band: default_band(),
            region: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ObstacleFile {
    shape: ShapeSpec,
    #[serde(default)]
    pose: Pose,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ScenarioFile {
    #[serde(default)]
    name: String,
    robot: PathBuf,
    #[serde(default)]
    workpiece: Option<ShapeSpec>,
    #[serde(default)]
    obstacles: Vec<ObstacleFile>,
    #[serde(default)]
    crane: CraneSpec,
    #[serde(default)]
    grid: GridParams,
    #[serde(default)]
    schedule: Option<Vec<f64>>,
    #[serde(default)]
    half_space: bool,
    #[serde(default)]
    trials: Vec<Trial>,
}

/// Everything needed to precompute and serve one study setup.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub robot: RobotModel,
    /// Workpiece mesh in its local frame; posed by the crane.
    pub workpiece: Option<Arc<MeshIndex>>,
    pub obstacles: Vec<(Arc<MeshIndex>, Pose)>,
    pub crane: CraneSpec,
    pub grid: GridParams,
    pub schedule: StepSchedule,
    pub half_space: bool,
    pub trials: Vec<Trial>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_file(file, base).map_err(|e| match e {
            Error::InvalidArgument(message) => Error::Format {
                path: path.to_owned(),
                message,
            },
            other => other,
        })
    }

    fn from_file(file: ScenarioFile, base: &Path) -> Result<Self> {
        let robot = RobotModel::load(base.join(&file.robot))?;
        let workpiece = file
            .workpiece
            .as_ref()
            .map(|s| s.to_mesh(base).map(index_mesh))
            .transpose()?;
        let obstacles = file
            .obstacles
            .iter()
            .map(|o| Ok((index_mesh(o.shape.to_mesh(base)?), o.pose)))
            .collect::<Result<Vec<_>>>()?;
        let schedule = match file.schedule {
            Some(steps) => StepSchedule::new(steps)?,
            None => StepSchedule::from_robot(&robot)?,
        };
        let scenario = Scenario {
            name: file.name,
            robot,
            workpiece,
            obstacles,
            crane: file.crane,
            grid: file.grid,
            schedule,
            half_space: file.half_space,
            trials: file.trials,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.crane.validate()?;
        crate::reachability::enumeration_count(&self.robot, &self.schedule, self.half_space)?;
        if !(self.grid.voxel_size > 0.0) {
            return Err(Error::invalid("grid voxelSize must be positive"));
        }
        if !(self.grid.band >= 0.0) {
            return Err(Error::invalid("grid band must be non-negative"));
        }
        if self.workpiece.is_none() && self.grid.region.is_none() {
            return Err(Error::invalid("scenario needs a workpiece or a grid region"));
        }
        if let Some(r) = &self.grid.region {
            if (0..3).any(|a| !(r.max[a] > r.min[a])) {
                return Err(Error::invalid("grid region max must exceed min on every axis"));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for trial in &self.trials {
            if !seen.insert(trial.id.as_str()) {
                return Err(Error::invalid(format!("duplicate trial id `{}`", trial.id)));
            }
            if trial.max_attempts == 0 || trial.attempts_used > trial.max_attempts {
                return Err(Error::invalid(format!("trial `{}` has an invalid attempt budget", trial.id)));
            }
            if let Some(mesh) = &self.workpiece {
                for tp in &trial.task_points {
                    let d = mesh.distance(&tp.position)?;
                    if d > self.grid.band + 1e-9 {
                        return Err(Error::invalid(format!(
                            "trial `{}`: task point `{}` is {d:.3} m from the workpiece, beyond band {}",
                            trial.id, tp.label, self.grid.band
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn trial(&self, id: &str) -> Option<&Trial> {
        self.trials.iter().find(|t| t.id == id)
    }

    /// Applies command-line overrides and re-validates.
    pub fn with_overrides(
        mut self,
        schedule: Option<StepSchedule>,
        voxel_size: Option<f64>,
        band: Option<f64>,
    ) -> Result<Self> {
        if let Some(s) = schedule {
            self.schedule = s;
        }
        if let Some(v) = voxel_size {
            self.grid.voxel_size = v;
        }
        if let Some(b) = band {
            self.grid.band = b;
        }
        self.validate()?;
        Ok(self)
    }
}
