//! The crane/workpiece scenario: discrete workpiece placements, task
//! points and the attempt-limited accept loop.

mod file;
pub mod procedural;
mod trial;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use file::{GridParams, Region, Scenario, ShapeSpec};
pub use trial::{evaluate_config, submit_attempt, Difficulty, Evaluation, Outcome, PointVerdict, TaskPoint, Trial};

use crate::collision::{MeshIndex, Scene, SceneObject};
use crate::kinematics::Pose;
use crate::reachability::{
    select_active_voxels, sweep_reachability, ReachabilityMap, StepSchedule, SweepConfig,
    VoxelCoord, VoxelGrid,
};
use crate::{Error, Result, Vec3};

/// Crane that turns and lifts the workpiece in discrete steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CraneSpec {
    pub rotation_step_deg: f64,
    pub rotation_count: u32,
    pub height_count: u32,
    /// Lift per height step, meters.
    pub height_step: f64,
    /// Workpiece hang point at configuration (0, 0).
    pub base_pose: Pose,
}

impl Default for CraneSpec {
    fn default() -> Self {
        Self {
            rotation_step_deg: 40.0,
            rotation_count: 9,
            height_count: 4,
            height_step: 0.15,
            base_pose: Pose::identity(),
        }
    }
}

impl CraneSpec {
    pub fn single() -> Self {
        Self {
            rotation_step_deg: 360.0,
            rotation_count: 1,
            height_count: 1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rotation_count == 0 || self.height_count == 0 {
            return Err(Error::invalid("crane needs at least one rotation and one height"));
        }
        if (self.rotation_step_deg * self.rotation_count as f64 - 360.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "crane rotation step {}° × {} does not close a full turn",
                self.rotation_step_deg, self.rotation_count
            )));
        }
        if !self.height_step.is_finite() {
            return Err(Error::invalid("crane height step must be finite"));
        }
        Ok(())
    }

    pub fn config_count(&self) -> usize {
        self.rotation_count as usize * self.height_count as usize
    }

    /// All configurations, rotation-major.
    pub fn configs(&self) -> impl Iterator<Item = WorkpieceConfig> + '_ {
        (0..self.rotation_count).flat_map(move |rot| {
            (0..self.height_count).map(move |height| WorkpieceConfig::new(rot, height))
        })
    }

    pub fn contains(&self, cfg: &WorkpieceConfig) -> bool {
        cfg.rot_index < self.rotation_count && cfg.height_index < self.height_count
    }

    pub fn check(&self, cfg: &WorkpieceConfig) -> Result<()> {
        if !self.contains(cfg) {
            return Err(Error::invalid(format!(
                "configuration (rot {}, height {}) outside crane range {}×{}",
                cfg.rot_index, cfg.height_index, self.rotation_count, self.height_count
            )));
        }
        Ok(())
    }

    /// Workpiece pose after `rot_steps` presses of the rotate button
    /// (any sign) at `height_index`. Periodic in `rot_steps` with period
    /// `rotation_count`.
    pub fn transform(&self, rot_steps: i64, height_index: u32) -> Pose {
        let turns = rot_steps.rem_euclid(self.rotation_count.max(1) as i64);
        let angle = (turns as f64 * self.rotation_step_deg).to_radians();
        let lift = Pose::from_translation(Vec3::new(0.0, 0.0, height_index as f64 * self.height_step));
        self.base_pose
            .compose(&lift)
            .compose(&Pose::from_axis_angle(&Vec3::z_axis(), angle))
    }

    /// Configuration reached by rotating `steps` presses from `cfg`.
    pub fn rotated(&self, cfg: WorkpieceConfig, steps: i64) -> WorkpieceConfig {
        let rot = (cfg.rot_index as i64 + steps).rem_euclid(self.rotation_count as i64);
        WorkpieceConfig::new(rot as u32, cfg.height_index)
    }
}

/// Discrete crane state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorkpieceConfig {
    pub rot_index: u32,
    pub height_index: u32,
}

impl WorkpieceConfig {
    pub const fn new(rot_index: u32, height_index: u32) -> Self {
        Self {
            rot_index,
            height_index,
        }
    }
}

/// World pose of the workpiece at `cfg`.
pub fn config_pose(crane: &CraneSpec, cfg: &WorkpieceConfig) -> Result<Pose> {
    crane.check(cfg)?;
    Ok(crane.transform(cfg.rot_index as i64, cfg.height_index))
}

/// One reachability map per crane configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSet {
    pub crane: CraneSpec,
    pub maps: BTreeMap<WorkpieceConfig, ReachabilityMap>,
}

impl MapSet {
    pub fn get(&self, cfg: &WorkpieceConfig) -> Option<&ReachabilityMap> {
        self.maps.get(cfg)
    }

    /// Error unless every crane configuration has exactly one map.
    pub fn check_complete(&self) -> Result<()> {
        self.crane.validate()?;
        if let Some(missing) = self.crane.configs().find(|c| !self.maps.contains_key(c)) {
            return Err(Error::invalid(format!(
                "map set lacks configuration (rot {}, height {})",
                missing.rot_index, missing.height_index
            )));
        }
        if let Some(extra) = self.maps.keys().find(|c| !self.crane.contains(c)) {
            return Err(Error::invalid(format!(
                "map set has configuration (rot {}, height {}) outside the crane range",
                extra.rot_index, extra.height_index
            )));
        }
        Ok(())
    }
}

impl Scenario {
    /// Scene with the workpiece hung at `cfg`.
    pub fn scene_for(&self, cfg: &WorkpieceConfig) -> Result<Scene> {
        let pose = config_pose(&self.crane, cfg)?;
        Ok(self.scene_at(pose))
    }

    pub(crate) fn scene_at(&self, workpiece_pose: Pose) -> Scene {
        Scene {
            workpiece: self
                .workpiece
                .as_ref()
                .map(|m| SceneObject::new(Arc::clone(m), workpiece_pose)),
            obstacles: self
                .obstacles
                .iter()
                .map(|(m, p)| SceneObject::new(Arc::clone(m), *p))
                .collect(),
        }
    }

    /// Grid and active voxels for `cfg`: a fixed world region (all voxels
    /// active) or a grid re-centered on the posed workpiece with band
    /// selection.
    pub fn grid_for(&self, cfg: &WorkpieceConfig) -> Result<(VoxelGrid, BTreeSet<VoxelCoord>)> {
        let pose = config_pose(&self.crane, cfg)?;
        self.grid_at(pose)
    }

    pub(crate) fn grid_at(&self, pose: Pose) -> Result<(VoxelGrid, BTreeSet<VoxelCoord>)> {
        let cell = self.grid.voxel_size;
        if let Some(region) = &self.grid.region {
            let grid = VoxelGrid::covering(region.min, region.max, cell)?;
            let active = grid.coords().collect();
            return Ok((grid, active));
        }
        let mesh = self
            .workpiece
            .as_ref()
            .ok_or_else(|| Error::invalid("scenario needs a workpiece or an explicit grid region"))?;
        let bounds = mesh.bounds().transformed(&pose);
        let grid = VoxelGrid::centered_on(&bounds, self.grid.band + cell, cell)?;
        let active = select_active_voxels(&grid, mesh, &pose, self.grid.band)?;
        Ok((grid, active))
    }

    pub fn sweep_config(&self, cfg: &WorkpieceConfig, schedule: &StepSchedule, threads: usize) -> Result<ReachabilityMap> {
        let scene = self.scene_for(cfg)?;
        let (grid, active) = self.grid_for(cfg)?;
        sweep_reachability(
            &self.robot,
            &scene,
            &active,
            &grid,
            schedule,
            &SweepConfig {
                half_space: self.half_space,
                threads,
            },
        )
    }
}

/// Sweeps every crane configuration. `progress` is called after each one.
pub fn precompute_all(
    scenario: &Scenario,
    schedule: &StepSchedule,
    threads: usize,
    mut progress: impl FnMut(&WorkpieceConfig, &ReachabilityMap),
) -> Result<MapSet> {
    scenario.crane.validate()?;
    let mut maps = BTreeMap::new();
    for cfg in scenario.crane.configs() {
        let map = scenario
            .sweep_config(&cfg, schedule, threads)
            .map_err(|e| Error::Config {
                rot: cfg.rot_index,
                height: cfg.height_index,
                source: Box::new(e),
            })?;
        progress(&cfg, &map);
        maps.insert(cfg, map);
    }
    Ok(MapSet {
        crane: scenario.crane.clone(),
        maps,
    })
}

/// Shared index for a shape, built once.
pub(crate) fn index_mesh(mesh: crate::collision::TriMesh) -> Arc<MeshIndex> {
    Arc::new(MeshIndex::build(mesh))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_config_is_base_pose() {
        let crane = CraneSpec {
            base_pose: Pose::from_translation(Vec3::new(1.0, 0.0, 0.5)),
            ..CraneSpec::default()
        };
        assert_eq!(config_pose(&crane, &WorkpieceConfig::new(0, 0)).unwrap(), crane.base_pose);
    }

    #[test]
    fn rotation_is_periodic() {
        let crane = CraneSpec::default();
        for h in 0..4 {
            assert_eq!(crane.transform(9, h), crane.transform(0, h));
            assert_eq!(crane.transform(-1, h), crane.transform(8, h));
        }
        assert_eq!(crane.rotated(WorkpieceConfig::new(8, 1), 1), WorkpieceConfig::new(0, 1));
        assert_eq!(crane.rotated(WorkpieceConfig::new(0, 1), -1), WorkpieceConfig::new(8, 1));
    }

    #[test]
    fn config_3_2_by_hand() {
        let crane = CraneSpec {
            height_step: 0.1,
            ..CraneSpec::default()
        };
        let pose = config_pose(&crane, &WorkpieceConfig::new(3, 2)).unwrap();
        // 120° about z then lift 0.2: (1,0,0) → (cos120°, sin120°, 0.2).
        let p = pose.transform_point(&Vec3::new(1.0, 0.0, 0.0));
        let expect = Vec3::new(-0.5, 3f64.sqrt() / 2.0, 0.2);
        assert!((p - expect).norm() < 1e-12);
    }

    #[test]
    fn out_of_range_config_is_rejected() {
        let crane = CraneSpec::default();
        assert!(config_pose(&crane, &WorkpieceConfig::new(9, 0)).is_err());
        assert!(config_pose(&crane, &WorkpieceConfig::new(0, 4)).is_err());
    }

    #[test]
    fn crane_validation() {
        assert!(CraneSpec::default().validate().is_ok());
        assert_eq!(CraneSpec::default().config_count(), 36);
        assert_eq!(CraneSpec::default().configs().count(), 36);
        let bad = CraneSpec {
            rotation_step_deg: 30.0,
            ..CraneSpec::default()
        };
        assert!(bad.validate().is_err());
    }
}
