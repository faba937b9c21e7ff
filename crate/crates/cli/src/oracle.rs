//! Cross-checks a scenario's pruned sweep against the dense reference sweep
//! and, for obstacle-free planar two-link arms, against the analytic annulus.

use reachvox::kinematics::RobotModel;
use reachvox::reachability::{dense_sweep, ReachabilityMap, StepSchedule, VoxelCoord, VoxelGrid};
use reachvox::scenario::{Scenario, WorkpieceConfig};
use reachvox::{Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub agree: usize,
    pub total: usize,
}

impl Agreement {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            100.0
        } else {
            100.0 * self.agree as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub cfg: WorkpieceConfig,
    pub dense: Agreement,
    pub annulus: Option<Agreement>,
}

impl OracleReport {
    pub fn worst_percent(&self) -> f64 {
        let d = self.dense.percent();
        self.annulus.map_or(d, |a| d.min(a.percent()))
    }
}

/// Link lengths of a planar two-link arm turning about world z with full
/// revolutions, if `robot` is one.
pub fn planar_two_link(robot: &RobotModel) -> Option<(f64, f64)> {
    let joints = robot.joints();
    if joints.len() != 2 || robot.enumerated_count() != 2 {
        return None;
    }
    let level = |t: &Vec3| t.z.abs() < 1e-12;
    let z = Vec3::z_axis();
    let base = robot.base_pose();
    let planar = base.rotation.angle() < 1e-12
        && joints.iter().all(|j| {
            (j.axis.into_inner() - z.into_inner()).norm() < 1e-12
                && j.parent_transform.rotation.angle() < 1e-12
                && level(&j.parent_transform.translation)
                && j.span_deg() >= 360.0 - 1e-9
        })
        && level(&robot.tool_offset().translation);
    if !planar {
        return None;
    }
    let l1 = joints[1].parent_transform.translation.norm();
    let l2 = robot.tool_offset().translation.norm();
    Some((l1, l2))
}

/// True when the cell meets the annulus `inner <= r <= outer` around
/// `center` in the plane `z = center.z`.
pub fn cell_meets_annulus(grid: &VoxelGrid, c: &VoxelCoord, center: &Vec3, inner: f64, outer: f64) -> bool {
    let b = grid.cell_bounds(c);
    if center.z < b.min.z || center.z >= b.max.z {
        return false;
    }
    let near = |lo: f64, hi: f64| if lo > 0.0 { lo } else if hi < 0.0 { -hi } else { 0.0 };
    let far = |lo: f64, hi: f64| lo.abs().max(hi.abs());
    let (x0, x1) = (b.min.x - center.x, b.max.x - center.x);
    let (y0, y1) = (b.min.y - center.y, b.max.y - center.y);
    let rn = near(x0, x1).hypot(near(y0, y1));
    let rf = far(x0, x1).hypot(far(y0, y1));
    rn <= outer && rf >= inner
}

pub fn compare_maps(a: &ReachabilityMap, b: &ReachabilityMap) -> Agreement {
    let agree = a
        .status
        .iter()
        .filter(|(c, s)| b.get(c) == Some(**s))
        .count();
    Agreement {
        agree,
        total: a.status.len().max(b.status.len()),
    }
}

pub fn compare_annulus(map: &ReachabilityMap, center: &Vec3, inner: f64, outer: f64) -> Agreement {
    let agree = map
        .status
        .iter()
        .filter(|(c, s)| cell_meets_annulus(&map.grid, c, center, inner, outer) == s.is_reachable())
        .count();
    Agreement {
        agree,
        total: map.status.len(),
    }
}

/// Runs the oracle on `configs` (all crane configurations when empty).
pub fn run_oracle(
    scenario: &Scenario,
    schedule: &StepSchedule,
    threads: usize,
    configs: &[WorkpieceConfig],
    mut progress: impl FnMut(&OracleReport),
) -> Result<Vec<OracleReport>> {
    let configs: Vec<WorkpieceConfig> = if configs.is_empty() {
        scenario.crane.configs().collect()
    } else {
        configs.to_vec()
    };
    let planar = planar_two_link(&scenario.robot)
        .filter(|_| scenario.workpiece.is_none() && scenario.obstacles.is_empty());
    let mut reports = Vec::new();
    for cfg in configs {
        scenario.crane.check(&cfg)?;
        let pruned = scenario.sweep_config(&cfg, schedule, threads)?;
        let scene = scenario.scene_for(&cfg)?;
        let (grid, active) = scenario.grid_for(&cfg)?;
        let dense = dense_sweep(&scenario.robot, &scene, &active, &grid, schedule, scenario.half_space)?;
        let annulus = planar.map(|(l1, l2)| {
            let center = scenario.robot.base_pose().translation;
            compare_annulus(&pruned, &center, (l1 - l2).abs(), l1 + l2)
        });
        let report = OracleReport {
            cfg,
            dense: compare_maps(&pruned, &dense),
            annulus,
        };
        progress(&report);
        reports.push(report);
    }
    Ok(reports)
}
