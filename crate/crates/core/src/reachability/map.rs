use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::grid::{VoxelCoord, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VoxelStatus {
    Blocked,
    Reachable,
}

impl VoxelStatus {
    pub fn is_reachable(self) -> bool {
        self == VoxelStatus::Reachable
    }
}

/// How a map was produced. Not persisted in map-set files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepMeta {
    pub configs_tested: u64,
    pub sweep_seconds: f64,
    pub step_schedule_deg: Vec<f64>,
}

/// Status of every active voxel for one workpiece placement.
#[derive(Debug, Clone)]
pub struct ReachabilityMap {
    pub grid: VoxelGrid,
    pub status: BTreeMap<VoxelCoord, VoxelStatus>,
    pub meta: SweepMeta,
}

/// Equality covers the grid and voxel statuses; `meta` (timings and
/// counters) is ignored.
impl PartialEq for ReachabilityMap {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.status == other.status
    }
}

impl ReachabilityMap {
    pub fn new(grid: VoxelGrid) -> Self {
        Self {
            grid,
            status: BTreeMap::new(),
            meta: SweepMeta::default(),
        }
    }

    pub fn get(&self, c: &VoxelCoord) -> Option<VoxelStatus> {
        self.status.get(c).copied()
    }

    pub fn reachable(&self) -> impl Iterator<Item = &VoxelCoord> {
        self.status
            .iter()
            .filter(|(_, s)| s.is_reachable())
            .map(|(c, _)| c)
    }

    pub fn stats(&self) -> MapStats {
        map_stats(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MapStats {
    pub active_count: usize,
    pub reachable_count: usize,
    pub reachable_fraction: f64,
}

pub fn map_stats(map: &ReachabilityMap) -> MapStats {
    let active_count = map.status.len();
    let reachable_count = map.reachable().count();
    let reachable_fraction = if active_count == 0 {
        0.0
    } else {
        reachable_count as f64 / active_count as f64
    };
    MapStats {
        active_count,
        reachable_count,
        reachable_fraction,
    }
}
