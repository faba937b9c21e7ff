//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations: sweep a planar two-link arm (optionally behind a
//! wall) into a voxel map, solve IK for a dragged target, and count the
//! configurations the UR10e sweep enumerates for a step schedule.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeSet;
use std::sync::Arc;

use wasm_bindgen::prelude::*;

use reachvox::collision::{robot_collides, MeshIndex, Scene};
use reachvox::kinematics::{forward_kinematics, planar_arm, solve_ik, IkOptions, JointVector, Pose, RobotModel};
use reachvox::reachability::{enumeration_count, sweep_reachability, StepSchedule, SweepConfig, VoxelCoord, VoxelGrid};
use reachvox::scenario::procedural::box_mesh;
use reachvox::Vec3;

const UR10E_JSON: &str = include_str!("../../../data/ur10e.robot.json");
const CAPSULE_RADIUS: f64 = 0.02;
const WALL_THICKNESS: f64 = 0.1;

fn js_err(e: reachvox::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn arm(l1: f64, l2: f64) -> Result<RobotModel, reachvox::Error> {
    planar_arm(&[l1, l2], CAPSULE_RADIUS)
}

/// Wall occupying `wall_x <= x <= wall_x + 0.1` across the arm plane.
fn scene(wall_x: Option<f64>, half_span: f64) -> Scene {
    match wall_x {
        Some(x) => {
            let mesh = box_mesh(
                Vec3::new(x + WALL_THICKNESS / 2.0, 0.0, 0.0),
                Vec3::new(WALL_THICKNESS / 2.0, half_span, 0.5),
            );
            Scene::with_workpiece(Arc::new(MeshIndex::build(mesh)), Pose::identity())
        }
        None => Scene::empty(),
    }
}

/// One voxel layer in the arm plane.
#[wasm_bindgen]
pub struct PlanarMap {
    origin_x: f64,
    origin_y: f64,
    cell: f64,
    nx: u32,
    ny: u32,
    status: Vec<u8>,
    configs: f64,
}

#[wasm_bindgen]
impl PlanarMap {
    #[wasm_bindgen(getter)]
    pub fn origin_x(&self) -> f64 {
        self.origin_x
    }
    #[wasm_bindgen(getter)]
    pub fn origin_y(&self) -> f64 {
        self.origin_y
    }
    #[wasm_bindgen(getter)]
    pub fn cell(&self) -> f64 {
        self.cell
    }
    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> u32 {
        self.nx
    }
    #[wasm_bindgen(getter)]
    pub fn ny(&self) -> u32 {
        self.ny
    }
    /// Row-major by `y` then `x`; 1 reachable, 0 blocked.
    #[wasm_bindgen(getter)]
    pub fn status(&self) -> Vec<u8> {
        self.status.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn configs(&self) -> f64 {
        self.configs
    }
    pub fn reachable_count(&self) -> u32 {
        self.status.iter().filter(|s| **s == 1).count() as u32
    }
}

/// Sweeps a planar arm with links `l1`, `l2` at `step_deg` on both joints
/// over a square grid of `cell`-sized voxels covering the reach.
#[wasm_bindgen]
pub fn planar_sweep(l1: f64, l2: f64, step_deg: f64, cell: f64, wall_x: Option<f64>) -> Result<PlanarMap, JsError> {
    let robot = arm(l1, l2).map_err(js_err)?;
    if !(cell > 0.0) {
        return Err(JsError::new("cell must be positive"));
    }
    let reach = l1 + l2 + cell;
    let grid = VoxelGrid::covering(
        Vec3::new(-reach, -reach, -cell / 2.0),
        Vec3::new(reach, reach, cell / 2.0),
        cell,
    )
    .map_err(js_err)?;
    let active: BTreeSet<VoxelCoord> = grid.coords().collect();
    let schedule = StepSchedule::new(vec![step_deg, step_deg]).map_err(js_err)?;
    let map = sweep_reachability(
        &robot,
        &scene(wall_x, 2.0 * reach),
        &active,
        &grid,
        &schedule,
        &SweepConfig::default(),
    )
    .map_err(js_err)?;
    let [nx, ny, _] = grid.dims;
    let mut status = vec![0u8; (nx * ny) as usize];
    for c in map.reachable() {
        status[(c.j as u32 * nx + c.i as u32) as usize] = 1;
    }
    Ok(PlanarMap {
        origin_x: grid.origin.x,
        origin_y: grid.origin.y,
        cell,
        nx,
        ny,
        status,
        configs: map.meta.configs_tested as f64,
    })
}

/// IK for a dragged target. Returns
/// `[q1, q2, residual, converged, collides, elbow_x, elbow_y, tip_x, tip_y]`.
#[wasm_bindgen]
pub fn planar_ik(
    l1: f64,
    l2: f64,
    target_x: f64,
    target_y: f64,
    seed1: f64,
    seed2: f64,
    wall_x: Option<f64>,
) -> Result<Vec<f64>, JsError> {
    let robot = arm(l1, l2).map_err(js_err)?;
    let seed = JointVector::clamped(&robot, &[seed1, seed2]).map_err(js_err)?;
    let target = Vec3::new(target_x, target_y, 0.0);
    let opts = IkOptions::default().with_tolerance(1e-3);
    let sol = solve_ik(&robot, &target, &seed, &opts).map_err(js_err)?;
    let fk = forward_kinematics(&robot, &sol.joints).map_err(js_err)?;
    let collides = robot_collides(&robot, &sol.joints, &scene(wall_x, 2.0 * (l1 + l2))).map_err(js_err)?;
    let q = sol.joints.angles();
    let elbow = fk.link_poses[1].translation;
    Ok(vec![
        q[0],
        q[1],
        sol.residual,
        sol.converged as u8 as f64,
        collides as u8 as f64,
        elbow.x,
        elbow.y,
        fk.tooltip.x,
        fk.tooltip.y,
    ])
}

/// Configurations the UR10e sweep visits for a five-entry step schedule.
#[wasm_bindgen]
pub fn ur10e_enumeration_count(steps_deg: Vec<f64>, half_space: bool) -> Result<f64, JsError> {
    let robot = RobotModel::from_json_str(UR10E_JSON).map_err(js_err)?;
    let schedule = StepSchedule::new(steps_deg).map_err(js_err)?;
    let n = enumeration_count(&robot, &schedule, half_space).map_err(js_err)?;
    Ok(n as f64)
}
