use serde::{Deserialize, Serialize};

use super::{config_pose, CraneSpec, MapSet, WorkpieceConfig};
use crate::collision::vec3_array;
use crate::reachability::{ReachabilityMap, VoxelCoord, VoxelStatus};
use crate::{Error, Result, Vec3};

pub const DEFAULT_MAX_ATTEMPTS: u32 = 8;

/// Contact point in the workpiece's local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPoint {
    #[serde(with = "vec3_array")]
    pub position: Vec3,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pending,
    Success,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trial {
    pub id: String,
    pub task_points: Vec<TaskPoint>,
    pub difficulty: Difficulty,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    #[serde(default)]
    pub attempts_used: u32,
    #[serde(default = "pending")]
    pub outcome: Outcome,
}

fn default_max_attempts() -> u32 {
    DEFAULT_MAX_ATTEMPTS
}

fn pending() -> Outcome {
    Outcome::Pending
}

impl Trial {
    pub fn new(id: impl Into<String>, task_points: Vec<TaskPoint>, difficulty: Difficulty) -> Self {
        Self {
            id: id.into(),
            task_points,
            difficulty,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            attempts_used: 0,
            outcome: Outcome::Pending,
        }
    }

    pub fn remaining_attempts(&self) -> u32 {
        self.max_attempts.saturating_sub(self.attempts_used)
    }

    /// Back to a fresh pending state.
    pub fn reset(&mut self) {
        self.attempts_used = 0;
        self.outcome = Outcome::Pending;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointVerdict {
    pub label: String,
    /// World position at the evaluated configuration.
    #[serde(with = "vec3_array")]
    pub position: Vec3,
    /// `None` when the point falls outside the grid.
    pub voxel: Option<VoxelCoord>,
    pub status: VoxelStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Evaluation {
    pub valid: bool,
    pub per_point: Vec<PointVerdict>,
}

/// Valid iff every task point, posed at `cfg`, lands in a reachable voxel.
/// Points outside the grid, or in voxels the map does not hold, count as
/// blocked.
pub fn evaluate_config(
    map: &ReachabilityMap,
    crane: &CraneSpec,
    cfg: &WorkpieceConfig,
    task_points: &[TaskPoint],
) -> Result<Evaluation> {
    let pose = config_pose(crane, cfg)?;
    let per_point: Vec<PointVerdict> = task_points
        .iter()
        .map(|tp| {
            let position = pose.transform_point(&tp.position);
            let voxel = map.grid.voxel_of_point(&position);
            let status = voxel
                .and_then(|c| map.get(&c))
                .unwrap_or(VoxelStatus::Blocked);
            PointVerdict {
                label: tp.label.clone(),
                position,
                voxel,
                status,
            }
        })
        .collect();
    Ok(Evaluation {
        valid: per_point.iter().all(|p| p.status.is_reachable()),
        per_point,
    })
}

/// One press of the accept button.
pub fn submit_attempt(
    trial: &mut Trial,
    maps: &MapSet,
    crane: &CraneSpec,
    cfg: &WorkpieceConfig,
) -> Result<Evaluation> {
    if trial.outcome != Outcome::Pending {
        return Err(Error::InvalidState(format!(
            "trial {} is already {:?}",
            trial.id, trial.outcome
        )));
    }
    crane.check(cfg)?;
    let map = maps.get(cfg).ok_or_else(|| {
        Error::invalid(format!(
            "no map for configuration (rot {}, height {})",
            cfg.rot_index, cfg.height_index
        ))
    })?;
    let eval = evaluate_config(map, crane, cfg, &trial.task_points)?;
    trial.attempts_used += 1;
    if eval.valid {
        trial.outcome = Outcome::Success;
    } else if trial.attempts_used >= trial.max_attempts {
        trial.outcome = Outcome::Failed;
    }
    Ok(eval)
}
