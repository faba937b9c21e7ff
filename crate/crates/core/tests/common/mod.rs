#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use reachvox::collision::{MeshIndex, TriMesh};
use reachvox::kinematics::{JointSpec, JointVector, Pose, RobotModel};
use reachvox::Vec3;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn ur10e() -> RobotModel {
    RobotModel::load(data_dir().join("ur10e.robot.json")).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_q(robot: &RobotModel, rng: &mut StdRng) -> JointVector {
    let angles = robot
        .joints()
        .iter()
        .map(|j| {
            let (lo, hi) = j.limits_rad();
            rng.random_range(lo..=hi)
        })
        .collect();
    JointVector::new(robot, angles).unwrap()
}

pub fn random_point(rng: &mut StdRng, half: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

/// Triangle soup of `n` random triangles inside a cube of half-size `half`.
pub fn random_mesh(rng: &mut StdRng, n: usize, half: f64) -> TriMesh {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for t in 0..n {
        let c = random_point(rng, half);
        for _ in 0..3 {
            vertices.push(c + random_point(rng, half * 0.3));
        }
        let b = 3 * t as u32;
        triangles.push([b, b + 1, b + 2]);
    }
    TriMesh::new(vertices, triangles).unwrap()
}

pub fn index(mesh: TriMesh) -> Arc<MeshIndex> {
    Arc::new(MeshIndex::build(mesh))
}

/// Spatial 3-joint arm: yaw base, then two pitch joints.
pub fn spatial_three_joint(radius: f64) -> RobotModel {
    use reachvox::collision::Capsule;
    let yaw = JointSpec::revolute(Pose::from_translation(Vec3::new(0.0, 0.0, 0.3)), Vec3::z_axis());
    let pitch1 = JointSpec::revolute(Pose::identity(), Vec3::y_axis());
    let pitch2 = JointSpec::revolute(Pose::from_translation(Vec3::new(0.5, 0.0, 0.0)), Vec3::y_axis());
    RobotModel::new(
        Pose::identity(),
        vec![yaw, pitch1, pitch2],
        vec![
            vec![Capsule::new(Vec3::new(0.0, 0.0, -0.25), Vec3::new(0.0, 0.0, -0.05), radius)],
            vec![Capsule::new(Vec3::new(0.05, 0.0, 0.0), Vec3::new(0.45, 0.0, 0.0), radius)],
            vec![Capsule::new(Vec3::new(0.05, 0.0, 0.0), Vec3::new(0.4, 0.0, 0.0), radius)],
        ],
        Pose::from_translation(Vec3::new(0.4, 0.0, 0.0)),
    )
    .unwrap()
}

use std::collections::{BTreeMap, BTreeSet};

use reachvox::collision::Scene;
use reachvox::kinematics::planar_arm;
use reachvox::reachability::{ReachabilityMap, VoxelCoord, VoxelGrid};

pub const PLANAR_LENGTHS: [f64; 2] = [0.6, 0.4];

pub fn planar_arm_default() -> RobotModel {
    planar_arm(&PLANAR_LENGTHS, 0.02).unwrap()
}

/// One voxel layer in the arm plane, every voxel active.
pub fn planar_grid(cell: f64) -> (VoxelGrid, BTreeSet<VoxelCoord>) {
    let h = 1.05;
    let grid = VoxelGrid::covering(
        Vec3::new(-h, -h, -cell / 2.0),
        Vec3::new(h, h, cell / 2.0),
        cell,
    )
    .unwrap();
    let active = grid.coords().collect();
    (grid, active)
}

/// Nearest and farthest distance from the z axis over a cell.
pub fn cell_radial_range(grid: &VoxelGrid, c: &VoxelCoord) -> (f64, f64) {
    let b = grid.cell_bounds(c);
    let near = |lo: f64, hi: f64| if lo > 0.0 { lo } else if hi < 0.0 { -hi } else { 0.0 };
    let far = |lo: f64, hi: f64| lo.abs().max(hi.abs());
    let nx = near(b.min.x, b.max.x);
    let ny = near(b.min.y, b.max.y);
    let fx = far(b.min.x, b.max.x);
    let fy = far(b.min.y, b.max.y);
    ((nx * nx + ny * ny).sqrt(), (fx * fx + fy * fy).sqrt())
}

pub struct AnnulusVerdict {
    pub agree: usize,
    pub total: usize,
    /// Disagreeing cells that do not touch either boundary circle.
    pub interior_disagreements: Vec<VoxelCoord>,
}

/// Compares a planar map with the analytic annulus `inner <= r <= outer`.
/// A cell is expected reachable when it intersects the annulus.
pub fn compare_with_annulus(map: &ReachabilityMap, inner: f64, outer: f64) -> AnnulusVerdict {
    let mut agree = 0;
    let mut interior_disagreements = Vec::new();
    for (c, status) in &map.status {
        let (near, far) = cell_radial_range(&map.grid, c);
        let expected = near <= outer && far >= inner;
        if expected == status.is_reachable() {
            agree += 1;
        } else {
            let touches = |radius: f64| near <= radius && radius <= far;
            if !touches(inner) && !touches(outer) {
                interior_disagreements.push(*c);
            }
        }
    }
    AnnulusVerdict {
        agree,
        total: map.status.len(),
        interior_disagreements,
    }
}

/// Independent planar oracle: walks the full sample lattice with no
/// pruning and marks a cell when `clear(elbow, tip)` holds. Collision is
/// decided by the caller in closed form.
pub fn planar_oracle(
    robot: &RobotModel,
    grid: &VoxelGrid,
    step_deg: [f64; 2],
    clear: impl Fn(&Vec3, &Vec3) -> bool,
) -> BTreeMap<VoxelCoord, bool> {
    let mut out: BTreeMap<VoxelCoord, bool> = grid.coords().map(|c| (c, false)).collect();
    let n1 = (360.0 / step_deg[0] + 1e-9).floor() as i64;
    let n2 = (360.0 / step_deg[1] + 1e-9).floor() as i64;
    for a in 0..=n1 {
        let t1 = (-180.0 + a as f64 * step_deg[0]).to_radians();
        for b in 0..=n2 {
            let t2 = (-180.0 + b as f64 * step_deg[1]).to_radians();
            let q = JointVector::clamped(robot, &[t1, t2]).unwrap();
            let fk = reachvox::kinematics::forward_kinematics(robot, &q).unwrap();
            let elbow = fk.link_poses[1].translation;
            let tip = fk.tooltip;
            // Scalar floor membership; cells on a shared face go up.
            let idx = |v: f64, o: f64| ((v - o) / grid.cell_size).floor();
            let (i, j, k) = (idx(tip.x, grid.origin.x), idx(tip.y, grid.origin.y), idx(tip.z, grid.origin.z));
            if i < 0.0 || j < 0.0 || k < 0.0 {
                continue;
            }
            let c = VoxelCoord::new(i as i32, j as i32, k as i32);
            if let Some(v) = out.get_mut(&c) {
                if !*v && clear(&elbow, &tip) {
                    *v = true;
                }
            }
        }
    }
    out
}

/// Distance from the segment `a`-`b` to the slab `lo <= x <= hi`.
pub fn segment_slab_gap(a: &Vec3, b: &Vec3, lo: f64, hi: f64) -> f64 {
    let (min, max) = (a.x.min(b.x), a.x.max(b.x));
    if max < lo {
        lo - max
    } else if min > hi {
        min - hi
    } else {
        0.0
    }
}

pub fn statuses(map: &ReachabilityMap) -> BTreeMap<VoxelCoord, bool> {
    map.status.iter().map(|(c, s)| (*c, s.is_reachable())).collect()
}

pub fn empty_scene() -> Scene {
    Scene::empty()
}
