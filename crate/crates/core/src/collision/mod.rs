//! Capsule-based collision queries between a robot and scene meshes.

mod bvh;
mod geometry;
mod mesh;

use std::sync::Arc;

pub use bvh::MeshIndex;
pub use geometry::{
    closest_point_on_triangle, point_segment_distance_sq, point_triangle_distance_sq,
    segment_segment_distance_sq, segment_triangle_distance_sq, Aabb, Capsule,
};
pub(crate) use geometry::vec3_array;
pub use mesh::{parse_obj, parse_stl, TriMesh};

use crate::kinematics::{forward_kinematics, JointVector, Pose, RobotModel};
use crate::{Result, Vec3};

/// Builds the spatial index for `mesh`.
pub fn build_mesh_accelerator(mesh: TriMesh) -> MeshIndex {
    MeshIndex::build(mesh)
}

/// Distance from world point `p` to the mesh placed at `pose`.
pub fn distance_point_mesh(p: &Vec3, mesh: &MeshIndex, pose: &Pose) -> Result<f64> {
    mesh.distance(&pose.inverse_transform_point(p))
}

pub fn capsule_mesh_intersects(
    capsule: &Capsule,
    capsule_pose: &Pose,
    mesh: &MeshIndex,
    mesh_pose: &Pose,
) -> bool {
    let world = capsule.transformed(capsule_pose);
    posed_capsule_hits(&world, mesh, mesh_pose)
}

fn posed_capsule_hits(world: &Capsule, mesh: &MeshIndex, mesh_pose: &Pose) -> bool {
    let a = mesh_pose.inverse_transform_point(&world.a);
    let b = mesh_pose.inverse_transform_point(&world.b);
    mesh.segment_within(&a, &b, world.radius)
}

/// A mesh placed in the world.
#[derive(Debug, Clone)]
pub struct SceneObject {
    pub mesh: Arc<MeshIndex>,
    pub pose: Pose,
    world_bounds: Aabb,
}

impl SceneObject {
    pub fn new(mesh: Arc<MeshIndex>, pose: Pose) -> Self {
        let world_bounds = mesh.bounds().transformed(&pose);
        Self {
            mesh,
            pose,
            world_bounds,
        }
    }

    pub fn world_bounds(&self) -> &Aabb {
        &self.world_bounds
    }

    pub fn hits_capsule(&self, world: &Capsule) -> bool {
        if !self
            .world_bounds
            .inflated(world.radius)
            .intersects_segment(&world.a, &world.b)
        {
            return false;
        }
        posed_capsule_hits(world, &self.mesh, &self.pose)
    }
}

/// Workpiece plus static obstacles.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub workpiece: Option<SceneObject>,
    pub obstacles: Vec<SceneObject>,
}

impl Scene {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_workpiece(mesh: Arc<MeshIndex>, pose: Pose) -> Self {
        Self {
            workpiece: Some(SceneObject::new(mesh, pose)),
            obstacles: Vec::new(),
        }
    }

    pub fn add_obstacle(&mut self, mesh: Arc<MeshIndex>, pose: Pose) {
        self.obstacles.push(SceneObject::new(mesh, pose));
    }

    pub fn objects(&self) -> impl Iterator<Item = &SceneObject> {
        self.workpiece.iter().chain(self.obstacles.iter())
    }

    pub fn hits_capsule(&self, world: &Capsule) -> bool {
        self.objects().any(|o| o.hits_capsule(world))
    }
}

/// Link `index`'s capsules placed at `pose`.
pub(crate) fn posed_link_capsules<'a>(
    robot: &'a RobotModel,
    index: usize,
    pose: &'a Pose,
) -> impl Iterator<Item = Capsule> + 'a {
    robot.link_capsules()[index]
        .iter()
        .map(move |c| c.transformed(pose))
}

/// Does link `index` at `pose` touch any scene mesh?
pub(crate) fn link_hits_scene(robot: &RobotModel, index: usize, pose: &Pose, scene: &Scene) -> bool {
    posed_link_capsules(robot, index, pose).any(|c| scene.hits_capsule(&c))
}

/// Does link `index` touch any earlier non-adjacent link (`0..index-1`)?
pub(crate) fn link_hits_earlier_links(robot: &RobotModel, index: usize, poses: &[Pose]) -> bool {
    if index < 2 {
        return false;
    }
    let caps = robot.link_capsules();
    caps[index].iter().any(|c| {
        let c = c.transformed(&poses[index]);
        (0..index - 1).any(|other| {
            caps[other]
                .iter()
                .any(|o| c.intersects(&o.transformed(&poses[other])))
        })
    })
}

/// Whether non-adjacent links overlap each other. Adjacent links share a
/// joint and are exempt.
pub fn robot_self_collides(robot: &RobotModel, link_poses: &[Pose]) -> bool {
    let posed: Vec<Vec<Capsule>> = (0..robot.joint_count())
        .map(|i| posed_link_capsules(robot, i, &link_poses[i]).collect())
        .collect();
    for i in 0..posed.len() {
        for j in i + 2..posed.len() {
            if posed[i]
                .iter()
                .any(|a| posed[j].iter().any(|b| a.intersects(b)))
            {
                return true;
            }
        }
    }
    false
}

/// True iff any link capsule touches a scene mesh or two non-adjacent
/// links overlap.
pub fn robot_collides(robot: &RobotModel, q: &JointVector, scene: &Scene) -> Result<bool> {
    let fk = forward_kinematics(robot, q)?;
    let hits_scene = fk
        .link_poses
        .iter()
        .enumerate()
        .any(|(i, pose)| link_hits_scene(robot, i, pose, scene));
    Ok(hits_scene || robot_self_collides(robot, &fk.link_poses))
}
