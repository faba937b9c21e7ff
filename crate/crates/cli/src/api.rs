//! JSON bodies exchanged with the viewer. These types are the published
//! schema: every response deserializes back into them without loss.

use serde::{Deserialize, Serialize};

use reachvox::collision::TriMesh;
use reachvox::kinematics::{Pose, RobotModel};
use reachvox::reachability::{MapStats, ReachabilityMap, VoxelGrid, VoxelStatus};
use reachvox::scenario::{CraneSpec, Difficulty, Evaluation, GridParams, Scenario, TaskPoint, Trial};

/// Tooltip tolerance for live IK checks, meters.
pub const IK_TOLERANCE: f64 = 0.005;
pub const IK_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ApiError {
    pub code: u16,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MeshData {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl From<&TriMesh> for MeshData {
    fn from(mesh: &TriMesh) -> Self {
        Self {
            vertices: mesh.vertices().iter().map(|v| [v.x, v.y, v.z]).collect(),
            triangles: mesh.triangles().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PosedMesh {
    pub mesh: MeshData,
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RobotSummary {
    pub joint_count: usize,
    pub enumerated_count: usize,
    pub reach_envelope: f64,
    /// The robot file, for client-side forward kinematics.
    pub model: serde_json::Value,
}

impl RobotSummary {
    pub fn new(robot: &RobotModel) -> Self {
        let model = serde_json::from_str(&robot.to_json_string()).unwrap_or(serde_json::Value::Null);
        Self {
            joint_count: robot.joint_count(),
            enumerated_count: robot.enumerated_count(),
            reach_envelope: robot.reach_envelope(),
            model,
        }
    }
}

/// Trial definition without its mutable progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TrialSummary {
    pub id: String,
    pub difficulty: Difficulty,
    pub max_attempts: u32,
    pub task_points: Vec<TaskPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScenarioSummary {
    pub name: String,
    pub crane: CraneSpec,
    pub grid: GridParams,
    pub schedule_deg: Vec<f64>,
    pub half_space: bool,
    pub robot: RobotSummary,
    pub workpiece: Option<MeshData>,
    pub obstacles: Vec<PosedMesh>,
    pub trials: Vec<TrialSummary>,
    pub ik_tolerance: f64,
}

impl ScenarioSummary {
    pub fn new(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            crane: s.crane.clone(),
            grid: s.grid.clone(),
            schedule_deg: s.schedule.per_joint_deg().to_vec(),
            half_space: s.half_space,
            robot: RobotSummary::new(&s.robot),
            workpiece: s.workpiece.as_ref().map(|m| MeshData::from(m.mesh())),
            obstacles: s
                .obstacles
                .iter()
                .map(|(m, pose)| PosedMesh {
                    mesh: MeshData::from(m.mesh()),
                    pose: *pose,
                })
                .collect(),
            trials: s
                .trials
                .iter()
                .map(|t| TrialSummary {
                    id: t.id.clone(),
                    difficulty: t.difficulty,
                    max_attempts: t.max_attempts,
                    task_points: t.task_points.clone(),
                })
                .collect(),
            ik_tolerance: IK_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MapResponse {
    pub rot: u32,
    pub height: u32,
    pub grid: VoxelGrid,
    /// `[i, j, k, status]`, status 1 reachable and 0 blocked, ascending.
    pub voxels: Vec<[i32; 4]>,
    pub stats: MapStats,
}

impl MapResponse {
    pub fn new(rot: u32, height: u32, map: &ReachabilityMap) -> Self {
        Self {
            rot,
            height,
            grid: map.grid,
            voxels: map
                .status
                .iter()
                .map(|(c, s)| [c.i, c.j, c.k, (*s == VoxelStatus::Reachable) as i32])
                .collect(),
            stats: map.stats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IkCheckRequest {
    pub target: [f64; 3],
    pub rot: u32,
    pub height: u32,
    /// Start configuration in radians; the rest pose when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IkCheckResponse {
    pub reachable: bool,
    pub collides: bool,
    pub joints: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub tooltip: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AttemptRequest {
    pub rot: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AttemptResponse {
    pub trial: Trial,
    pub remaining_attempts: u32,
    pub evaluation: Evaluation,
}
