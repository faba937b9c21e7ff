//! Hierarchical configuration sweep.
//!
//! Enumerated joints are visited as nested loops from the base outwards.
//! At every inner level the partial chain is checked once: a subtree is
//! skipped when the links placed so far already collide, or when the
//! remaining reach cannot get the tooltip into the box spanned by the
//! active cells. Both tests only discard configurations that could never
//! turn a voxel green, so the result equals the exhaustive sweep
//! ([`dense_sweep`]).

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::collision::{link_hits_earlier_links, link_hits_scene, robot_collides, Aabb, Scene};
use crate::kinematics::{tooltip_position, JointVector, Pose, RobotModel};
use crate::{Error, Result, Vec3};

use super::grid::{VoxelCoord, VoxelGrid};
use super::map::{ReachabilityMap, SweepMeta, VoxelStatus};

/// Enumeration step per enumerated joint, degrees, base first.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    per_joint_deg: Vec<f64>,
}

impl StepSchedule {
    pub fn new(per_joint_deg: Vec<f64>) -> Result<Self> {
        if per_joint_deg.is_empty() {
            return Err(Error::invalid("step schedule is empty"));
        }
        if let Some(bad) = per_joint_deg.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::invalid(format!("step sizes must be positive, got {bad}")));
        }
        Ok(Self { per_joint_deg })
    }

    /// The steps stored in the robot description.
    pub fn from_robot(robot: &RobotModel) -> Result<Self> {
        Self::new(
            robot.joints()[..robot.enumerated_count()]
                .iter()
                .map(|j| j.enum_step_deg)
                .collect(),
        )
    }

    pub fn per_joint_deg(&self) -> &[f64] {
        &self.per_joint_deg
    }

    /// Every step divided by two.
    pub fn halved(&self) -> Self {
        Self {
            per_joint_deg: self.per_joint_deg.iter().map(|s| s / 2.0).collect(),
        }
    }

    fn check(&self, robot: &RobotModel) -> Result<()> {
        let m = robot.enumerated_count();
        if m == 0 {
            return Err(Error::invalid("robot has no enumerated joints"));
        }
        if self.per_joint_deg.len() != m {
            return Err(Error::invalid(format!(
                "schedule has {} steps but the robot enumerates {m} joints",
                self.per_joint_deg.len()
            )));
        }
        Ok(())
    }
}

/// Span of the base joint's sweep when restricted to the half-space
/// facing the workpiece.
pub const HALF_SPACE_ARC_DEG: f64 = 180.0;

/// Samples `lo, lo+step, …` that fit in `span`, both ends included when
/// the step divides the span.
pub fn sample_count(span_deg: f64, step_deg: f64) -> u64 {
    (span_deg / step_deg + 1e-9).floor() as u64 + 1
}

/// Number of configurations a sweep visits.
pub fn enumeration_count(
    robot: &RobotModel,
    schedule: &StepSchedule,
    half_space: bool,
) -> Result<u64> {
    schedule.check(robot)?;
    Ok(robot
        .joints()
        .iter()
        .zip(schedule.per_joint_deg())
        .enumerate()
        .map(|(i, (joint, &step))| {
            let span = if i == 0 && half_space {
                joint.span_deg().min(HALF_SPACE_ARC_DEG)
            } else {
                joint.span_deg()
            };
            sample_count(span, step)
        })
        .product())
}

/// Base-joint angle (degrees) that turns the arm's rest-pose tooltip
/// toward `target`, measured about the base joint axis. `None` when the
/// target or the rest tooltip lies on the axis.
pub fn half_space_bearing_deg(robot: &RobotModel, target: &Vec3) -> Option<f64> {
    let joint = &robot.joints()[0];
    let frame = robot.base_pose().compose(&joint.parent_transform);
    let axis = joint.axis.into_inner();
    let project = |v: Vec3| v - axis * axis.dot(&v);
    let rest = tooltip_position(robot, &robot.rest_configuration()).ok()?;
    let reference = project(frame.inverse_transform_point(&rest));
    let toward = project(frame.inverse_transform_point(target));
    if reference.norm() < 1e-9 || toward.norm() < 1e-9 {
        return None;
    }
    let sin = axis.dot(&reference.cross(&toward));
    let cos = reference.dot(&toward);
    Some(sin.atan2(cos).to_degrees())
}

/// Angle values (radians) for every enumerated joint.
fn joint_samples(
    robot: &RobotModel,
    schedule: &StepSchedule,
    base_bearing_deg: Option<f64>,
) -> Vec<Vec<f64>> {
    robot
        .joints()
        .iter()
        .zip(schedule.per_joint_deg())
        .enumerate()
        .map(|(i, (joint, &step))| {
            let [lo, hi] = joint.limits_deg;
            let span = joint.span_deg();
            let degrees: Vec<f64> = match base_bearing_deg.filter(|_| i == 0) {
                Some(bearing) => {
                    let arc = span.min(HALF_SPACE_ARC_DEG);
                    let n = sample_count(arc, step);
                    if span >= 360.0 - 1e-9 {
                        // Full revolution: every angle has an in-limit
                        // equivalent, so center the arc on the bearing.
                        let start = bearing - arc / 2.0;
                        (0..n)
                            .map(|k| {
                                let mut a = start + k as f64 * step;
                                while a > hi {
                                    a -= 360.0;
                                }
                                while a < lo {
                                    a += 360.0;
                                }
                                a
                            })
                            .collect()
                    } else {
                        let start = (bearing - arc / 2.0).clamp(lo, hi - arc);
                        (0..n).map(|k| start + k as f64 * step).collect()
                    }
                }
                None => (0..sample_count(span, step))
                    .map(|k| lo + k as f64 * step)
                    .collect(),
            };
            degrees
                .into_iter()
                .map(|d| joint.clamp(d.to_radians()))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    /// Restrict the base joint to the arc facing the workpiece.
    pub half_space: bool,
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            half_space: false,
            threads: 1,
        }
    }
}

/// Active voxels whose center lies within `band` of the posed mesh
/// surface, widened by half a cell diagonal.
pub fn select_active_voxels(
    grid: &VoxelGrid,
    mesh: &crate::collision::MeshIndex,
    pose: &Pose,
    band: f64,
) -> Result<BTreeSet<VoxelCoord>> {
    if !(band >= 0.0) {
        return Err(Error::invalid(format!("band must be non-negative, got {band}")));
    }
    if mesh.is_empty() {
        return Err(Error::invalid("cannot select voxels around an empty mesh"));
    }
    let threshold = band + grid.half_diagonal();
    let local_bounds = mesh.bounds();
    let mut active = BTreeSet::new();
    for c in grid.coords() {
        let p = pose.inverse_transform_point(&grid.cell_center(&c));
        if local_bounds.distance_sq_to_point(&p) > threshold * threshold {
            continue;
        }
        if mesh.distance(&p)? <= threshold {
            active.insert(c);
        }
    }
    Ok(active)
}

struct Plan<'a> {
    robot: &'a RobotModel,
    scene: &'a Scene,
    grid: &'a VoxelGrid,
    samples: Vec<Vec<f64>>,
    rest: Vec<f64>,
    /// `subtree[d]`: configurations below one node at depth `d - 1`.
    subtree: Vec<u64>,
    reach_after: Vec<f64>,
    active: Vec<bool>,
    active_bounds: Aabb,
}

struct Worker<'p, 'a> {
    plan: &'p Plan<'a>,
    poses: Vec<Pose>,
    green: Vec<bool>,
    tested: u64,
}

impl<'p, 'a> Worker<'p, 'a> {
    fn new(plan: &'p Plan<'a>) -> Self {
        Self {
            plan,
            poses: vec![Pose::identity(); plan.robot.joint_count()],
            green: vec![false; plan.active.len()],
            tested: 0,
        }
    }

    fn visit(&mut self, depth: usize, sample: usize, parent: &Pose) {
        let plan = self.plan;
        let pose = plan.robot.link_pose(parent, depth, plan.samples[depth][sample]);
        self.poses[depth] = pose;
        if depth + 1 == plan.samples.len() {
            self.tested += 1;
            self.leaf(depth);
            return;
        }
        if self.prunable(depth) {
            self.tested += plan.subtree[depth + 1];
            return;
        }
        for next in 0..plan.samples[depth + 1].len() {
            self.visit(depth + 1, next, &pose);
        }
    }

    fn prunable(&self, depth: usize) -> bool {
        let plan = self.plan;
        let pose = &self.poses[depth];
        let reach = plan.reach_after[depth] + 1e-9;
        if plan.active_bounds.distance_sq_to_point(&pose.translation) > reach * reach {
            return true;
        }
        link_hits_scene(plan.robot, depth, pose, plan.scene)
            || link_hits_earlier_links(plan.robot, depth, &self.poses)
    }

    fn leaf(&mut self, last: usize) {
        let plan = self.plan;
        let robot = plan.robot;
        let mut pose = self.poses[last];
        for t in last + 1..robot.joint_count() {
            pose = robot.link_pose(&pose, t, plan.rest[t]);
            self.poses[t] = pose;
        }
        let tip = robot.tooltip_from_last(&pose);
        let Some(c) = plan.grid.voxel_of_point(&tip) else {
            return;
        };
        let idx = plan.grid.linear_index(&c);
        if !plan.active[idx] || self.green[idx] {
            return;
        }
        // Links before `last` were cleared on the way down.
        let collides = (last..robot.joint_count()).any(|l| {
            link_hits_scene(robot, l, &self.poses[l], plan.scene)
                || link_hits_earlier_links(robot, l, &self.poses)
        });
        if !collides {
            self.green[idx] = true;
        }
    }
}

fn check_active(active: &BTreeSet<VoxelCoord>, grid: &VoxelGrid) -> Result<()> {
    if let Some(c) = active.iter().find(|c| !grid.contains(c)) {
        return Err(Error::invalid(format!("active voxel {c:?} lies outside the grid")));
    }
    Ok(())
}

fn bearing_for(robot: &RobotModel, scene: &Scene, grid: &VoxelGrid, active: &BTreeSet<VoxelCoord>) -> Option<f64> {
    let target = match &scene.workpiece {
        Some(w) => w.world_bounds().center(),
        None => {
            let b = active
                .iter()
                .fold(Aabb::empty(), |acc, c| acc.merge(&grid.cell_bounds(c)));
            if b.is_empty() {
                return None;
            }
            b.center()
        }
    };
    half_space_bearing_deg(robot, &target)
}

fn build_map(
    grid: &VoxelGrid,
    active: &BTreeSet<VoxelCoord>,
    green: &[bool],
    meta: SweepMeta,
) -> ReachabilityMap {
    let status = active
        .iter()
        .map(|c| {
            let s = if green[grid.linear_index(c)] {
                VoxelStatus::Reachable
            } else {
                VoxelStatus::Blocked
            };
            (*c, s)
        })
        .collect();
    ReachabilityMap {
        grid: *grid,
        status,
        meta,
    }
}

#[cfg(not(target_arch = "wasm32"))]
fn timer() -> impl FnOnce() -> f64 {
    let start = std::time::Instant::now();
    move || start.elapsed().as_secs_f64()
}

#[cfg(target_arch = "wasm32")]
fn timer() -> impl FnOnce() -> f64 {
    || 0.0
}

/// Classifies every active voxel as reachable or blocked.
///
/// A voxel is reachable iff some enumerated configuration puts the tooltip
/// inside its cell without any collision. The outer joint's samples are
/// shared out among `config.threads` workers; each keeps a private green
/// set and the sets are OR-ed, so the result does not depend on the
/// thread count or visiting order.
pub fn sweep_reachability(
    robot: &RobotModel,
    scene: &Scene,
    active: &BTreeSet<VoxelCoord>,
    grid: &VoxelGrid,
    schedule: &StepSchedule,
    config: &SweepConfig,
) -> Result<ReachabilityMap> {
    schedule.check(robot)?;
    check_active(active, grid)?;
    let elapsed = timer();

    let bearing = if config.half_space {
        bearing_for(robot, scene, grid, active)
    } else {
        None
    };
    let samples = joint_samples(robot, schedule, bearing);
    let m = samples.len();
    let mut subtree = vec![1u64; m + 1];
    for d in (0..m).rev() {
        subtree[d] = subtree[d + 1] * samples[d].len() as u64;
    }
    let mut mask = vec![false; grid.len()];
    for c in active {
        mask[grid.linear_index(c)] = true;
    }
    let plan = Plan {
        robot,
        scene,
        grid,
        rest: robot.joints().iter().map(|j| j.rest_angle()).collect(),
        reach_after: (0..robot.joint_count())
            .map(|j| robot.reach_beyond_link(j))
            .collect(),
        active_bounds: active
            .iter()
            .fold(Aabb::empty(), |acc, c| acc.merge(&grid.cell_bounds(c))),
        active: mask,
        subtree,
        samples,
    };

    let base_count = plan.samples[0].len();
    let threads = config.threads.clamp(1, base_count);
    let (green, tested) = if threads == 1 {
        let mut w = Worker::new(&plan);
        let base = *robot.base_pose();
        for b in 0..base_count {
            w.visit(0, b, &base);
        }
        (w.green, w.tested)
    } else {
        let next = AtomicUsize::new(0);
        let results: Vec<(Vec<bool>, u64)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|_| {
                    s.spawn(|| {
                        let mut w = Worker::new(&plan);
                        let base = *robot.base_pose();
                        loop {
                            let b = next.fetch_add(1, Ordering::Relaxed);
                            if b >= base_count {
                                break;
                            }
                            w.visit(0, b, &base);
                        }
                        (w.green, w.tested)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
        let mut green = vec![false; plan.active.len()];
        let mut tested = 0;
        for (g, t) in results {
            tested += t;
            for (acc, v) in green.iter_mut().zip(g) {
                *acc |= v;
            }
        }
        (green, tested)
    };

    let meta = SweepMeta {
        configs_tested: tested,
        sweep_seconds: elapsed(),
        step_schedule_deg: schedule.per_joint_deg().to_vec(),
    };
    Ok(build_map(grid, active, &green, meta))
}

/// Exhaustive reference sweep: every configuration gets full forward
/// kinematics and, when its tooltip lands in an active cell, a full
/// [`robot_collides`] check. No pruning, single-threaded.
pub fn dense_sweep(
    robot: &RobotModel,
    scene: &Scene,
    active: &BTreeSet<VoxelCoord>,
    grid: &VoxelGrid,
    schedule: &StepSchedule,
    half_space: bool,
) -> Result<ReachabilityMap> {
    schedule.check(robot)?;
    check_active(active, grid)?;
    let elapsed = timer();
    let bearing = if half_space {
        bearing_for(robot, scene, grid, active)
    } else {
        None
    };
    let samples = joint_samples(robot, schedule, bearing);
    let m = samples.len();
    let mut angles: Vec<f64> = robot.joints().iter().map(|j| j.rest_angle()).collect();
    let mut index = vec![0usize; m];
    let mut green = vec![false; grid.len()];
    let mut tested = 0u64;
    'outer: loop {
        for d in 0..m {
            angles[d] = samples[d][index[d]];
        }
        tested += 1;
        let q = JointVector::from_vec_unchecked(angles.clone());
        let tip = tooltip_position(robot, &q)?;
        if let Some(c) = grid.voxel_of_point(&tip) {
            if active.contains(&c) && !green[grid.linear_index(&c)] && !robot_collides(robot, &q, scene)? {
                green[grid.linear_index(&c)] = true;
            }
        }
        // Odometer increment, last joint fastest.
        let mut d = m;
        loop {
            if d == 0 {
                break 'outer;
            }
            d -= 1;
            index[d] += 1;
            if index[d] < samples[d].len() {
                break;
            }
            index[d] = 0;
        }
    }
    let meta = SweepMeta {
        configs_tested: tested,
        sweep_seconds: elapsed(),
        step_schedule_deg: schedule.per_joint_deg().to_vec(),
    };
    Ok(build_map(grid, active, &green, meta))
}
