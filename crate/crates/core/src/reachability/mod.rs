//! Voxel grids and the reachability sweep.

mod grid;
mod map;
mod sweep;

pub use grid::{VoxelCoord, VoxelGrid};
pub use map::{map_stats, MapStats, ReachabilityMap, SweepMeta, VoxelStatus};
pub use sweep::{
    dense_sweep, enumeration_count, half_space_bearing_deg, sample_count, select_active_voxels,
    sweep_reachability, StepSchedule, SweepConfig, HALF_SPACE_ARC_DEG,
};
