//! Serial-chain kinematics: robot description, forward kinematics, reach
//! bound and position-only inverse kinematics.

mod ik;
mod pose;

use std::path::Path;

use nalgebra::Unit;
use serde::{Deserialize, Serialize};

pub use ik::{solve_ik, IkOptions, IkSolution};
pub use pose::Pose;

use crate::collision::Capsule;
use crate::{Error, Result, Vec3};

const LIMIT_SLACK: f64 = 1e-12;

/// One revolute joint and the fixed offset leading to it.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    /// Fixed transform from the previous link frame to this joint's frame.
    pub parent_transform: Pose,
    pub axis: Unit<Vec3>,
    /// `[lo, hi]` in degrees, as stored in robot files.
    pub limits_deg: [f64; 2],
    pub enum_step_deg: f64,
    /// Whether the sweep iterates this joint. Non-enumerated joints are
    /// held at [`JointSpec::rest_angle`].
    pub enumerated: bool,
}

impl JointSpec {
    /// Revolute joint with ±180° limits and a 10° enumeration step.
    pub fn revolute(parent_transform: Pose, axis: Unit<Vec3>) -> Self {
        Self {
            parent_transform,
            axis,
            limits_deg: [-180.0, 180.0],
            enum_step_deg: 10.0,
            enumerated: true,
        }
    }

    pub fn with_limits_deg(mut self, lo: f64, hi: f64) -> Self {
        self.limits_deg = [lo, hi];
        self
    }

    pub fn with_step_deg(mut self, step: f64) -> Self {
        self.enum_step_deg = step;
        self
    }

    pub fn fixed_in_sweep(mut self) -> Self {
        self.enumerated = false;
        self
    }

    pub fn limits_rad(&self) -> (f64, f64) {
        (self.limits_deg[0].to_radians(), self.limits_deg[1].to_radians())
    }

    pub fn span_deg(&self) -> f64 {
        self.limits_deg[1] - self.limits_deg[0]
    }

    pub fn clamp(&self, angle: f64) -> f64 {
        let (lo, hi) = self.limits_rad();
        angle.clamp(lo, hi)
    }

    pub fn within_limits(&self, angle: f64) -> bool {
        let (lo, hi) = self.limits_rad();
        angle >= lo - LIMIT_SLACK && angle <= hi + LIMIT_SLACK
    }

    /// Angle used for this joint when it is not enumerated: zero, clamped.
    pub fn rest_angle(&self) -> f64 {
        self.clamp(0.0)
    }

    #[inline]
    pub fn motion(&self, angle: f64) -> Pose {
        Pose::from_axis_angle(&self.axis, angle)
    }

    fn validate(&self, index: usize) -> Result<()> {
        let [lo, hi] = self.limits_deg;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid(format!(
                "joint {index}: limits must satisfy lo <= hi, got [{lo}, {hi}]"
            )));
        }
        if (self.axis.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("joint {index}: axis is not unit length")));
        }
        if self.enumerated && !(self.enum_step_deg > 0.0 && self.enum_step_deg.is_finite()) {
            return Err(Error::invalid(format!(
                "joint {index}: enumeration step must be positive, got {}",
                self.enum_step_deg
            )));
        }
        Ok(())
    }
}

/// A serial robot arm: joint chain, per-link collision capsules and tool.
///
/// Link `i` is the body moved by joint `i`; its capsules are expressed in
/// the frame obtained after applying joint `i`'s motion.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    base_pose: Pose,
    joints: Vec<JointSpec>,
    link_capsules: Vec<Vec<Capsule>>,
    tool_offset: Pose,
}

impl RobotModel {
    pub fn new(
        base_pose: Pose,
        joints: Vec<JointSpec>,
        link_capsules: Vec<Vec<Capsule>>,
        tool_offset: Pose,
    ) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::invalid("robot needs at least one joint"));
        }
        for (i, joint) in joints.iter().enumerate() {
            joint.validate(i)?;
        }
        if let Some(first_fixed) = joints.iter().position(|j| !j.enumerated) {
            if joints[first_fixed..].iter().any(|j| j.enumerated) {
                return Err(Error::invalid(
                    "only trailing joints may be excluded from enumeration",
                ));
            }
        }
        if link_capsules.len() > joints.len() {
            return Err(Error::invalid(format!(
                "{} capsule lists given for {} links",
                link_capsules.len(),
                joints.len()
            )));
        }
        let mut link_capsules = link_capsules;
        link_capsules.resize(joints.len(), Vec::new());
        for (link, caps) in link_capsules.iter().enumerate() {
            for cap in caps {
                cap.validate()
                    .map_err(|e| Error::invalid(format!("link {link}: {e}")))?;
            }
        }
        Ok(Self {
            base_pose,
            joints,
            link_capsules,
            tool_offset,
        })
    }

    pub fn base_pose(&self) -> &Pose {
        &self.base_pose
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    /// Number of leading joints iterated by the sweep.
    pub fn enumerated_count(&self) -> usize {
        self.joints.iter().take_while(|j| j.enumerated).count()
    }

    pub fn link_capsules(&self) -> &[Vec<Capsule>] {
        &self.link_capsules
    }

    pub fn tool_offset(&self) -> &Pose {
        &self.tool_offset
    }

    /// World pose of link `index` given the world pose of its parent link
    /// (or the base pose for link 0).
    #[inline]
    pub fn link_pose(&self, parent: &Pose, index: usize, angle: f64) -> Pose {
        let joint = &self.joints[index];
        parent
            .compose(&joint.parent_transform)
            .compose(&joint.motion(angle))
    }

    #[inline]
    pub fn tooltip_from_last(&self, last_link: &Pose) -> Vec3 {
        last_link.transform_point(&self.tool_offset.translation)
    }

    /// Upper bound on the tooltip's distance from the base origin.
    pub fn reach_envelope(&self) -> f64 {
        self.joints
            .iter()
            .map(|j| j.parent_transform.translation.norm())
            .sum::<f64>()
            + self.tool_offset.translation.norm()
    }

    /// Reach bound measured from the origin of link `index`'s frame.
    pub fn reach_beyond_link(&self, index: usize) -> f64 {
        self.joints[index + 1..]
            .iter()
            .map(|j| j.parent_transform.translation.norm())
            .sum::<f64>()
            + self.tool_offset.translation.norm()
    }

    /// Configuration with every joint at its rest angle.
    pub fn rest_configuration(&self) -> JointVector {
        JointVector(self.joints.iter().map(JointSpec::rest_angle).collect())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: RobotFile =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("robot file: {e}")))?;
        file.into_model()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: RobotFile = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        file.into_model().map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let file = RobotFile {
            base_pose: self.base_pose,
            tool_offset: self.tool_offset,
            joints: self
                .joints
                .iter()
                .map(|j| JointFile {
                    parent_transform: j.parent_transform,
                    axis: j.axis.into_inner().into(),
                    limits_deg: j.limits_deg,
                    enum_step_deg: j.enum_step_deg,
                    enumerated: j.enumerated,
                })
                .collect(),
            link_capsules: self.link_capsules.clone(),
        };
        serde_json::to_string_pretty(&file).expect("robot file serializes")
    }
}

/// Ordered joint angles in radians, one per joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(Vec<f64>);

impl JointVector {
    /// Checks length and limits against `robot`.
    pub fn new(robot: &RobotModel, angles: Vec<f64>) -> Result<Self> {
        let q = JointVector(angles);
        q.check_dims(robot)?;
        for (i, (joint, &a)) in robot.joints.iter().zip(&q.0).enumerate() {
            if !joint.within_limits(a) {
                return Err(Error::invalid(format!(
                    "joint {i}: angle {a} rad outside limits {:?} deg",
                    joint.limits_deg
                )));
            }
        }
        Ok(q)
    }

    /// Clamps each angle into its joint's limits.
    pub fn clamped(robot: &RobotModel, angles: &[f64]) -> Result<Self> {
        let q = JointVector(angles.to_vec());
        q.check_dims(robot)?;
        Ok(JointVector(
            robot
                .joints
                .iter()
                .zip(angles)
                .map(|(j, &a)| j.clamp(a))
                .collect(),
        ))
    }

    pub(crate) fn from_vec_unchecked(angles: Vec<f64>) -> Self {
        JointVector(angles)
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn within_limits(&self, robot: &RobotModel) -> bool {
        self.0.len() == robot.joint_count()
            && robot
                .joints
                .iter()
                .zip(&self.0)
                .all(|(j, &a)| j.within_limits(a))
    }

    fn check_dims(&self, robot: &RobotModel) -> Result<()> {
        if self.0.len() != robot.joint_count() {
            return Err(Error::invalid(format!(
                "joint vector has {} angles, robot has {} joints",
                self.0.len(),
                robot.joint_count()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FkResult {
    /// World pose of each link frame.
    pub link_poses: Vec<Pose>,
    pub tooltip: Vec3,
}

pub fn forward_kinematics(robot: &RobotModel, q: &JointVector) -> Result<FkResult> {
    q.check_dims(robot)?;
    let mut link_poses = Vec::with_capacity(robot.joint_count());
    let mut current = robot.base_pose;
    for (i, &angle) in q.0.iter().enumerate() {
        current = robot.link_pose(&current, i, angle);
        link_poses.push(current);
    }
    let tooltip = robot.tooltip_from_last(&current);
    Ok(FkResult {
        link_poses,
        tooltip,
    })
}

/// Tooltip position only; skips collecting link poses.
pub fn tooltip_position(robot: &RobotModel, q: &JointVector) -> Result<Vec3> {
    q.check_dims(robot)?;
    let mut current = robot.base_pose;
    for (i, &angle) in q.0.iter().enumerate() {
        current = robot.link_pose(&current, i, angle);
    }
    Ok(robot.tooltip_from_last(&current))
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RobotFile {
    #[serde(default)]
    base_pose: Pose,
    #[serde(default)]
    tool_offset: Pose,
    joints: Vec<JointFile>,
    #[serde(default)]
    link_capsules: Vec<Vec<Capsule>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct JointFile {
    #[serde(default)]
    parent_transform: Pose,
    axis: [f64; 3],
    limits_deg: [f64; 2],
    enum_step_deg: f64,
    #[serde(default = "default_true")]
    enumerated: bool,
}

fn default_true() -> bool {
    true
}

impl RobotFile {
    fn into_model(self) -> Result<RobotModel> {
        let joints = self
            .joints
            .into_iter()
            .enumerate()
            .map(|(i, j)| {
                let axis = Vec3::from(j.axis);
                if (axis.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!(
                        "joint {i}: axis must be unit length, got norm {}",
                        axis.norm()
                    )));
                }
                Ok(JointSpec {
                    parent_transform: j.parent_transform,
                    axis: Unit::new_normalize(axis),
                    limits_deg: j.limits_deg,
                    enum_step_deg: j.enum_step_deg,
                    enumerated: j.enumerated,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RobotModel::new(self.base_pose, joints, self.link_capsules, self.tool_offset)
    }
}

/// Planar arm in the XY plane: each link of the given length extends along
/// its local x axis and every joint rotates about z.
pub fn planar_arm(lengths: &[f64], capsule_radius: f64) -> Result<RobotModel> {
    if lengths.is_empty() {
        return Err(Error::invalid("planar arm needs at least one link"));
    }
    let mut joints = Vec::with_capacity(lengths.len());
    let mut capsules = Vec::with_capacity(lengths.len());
    for (i, &len) in lengths.iter().enumerate() {
        let offset = if i == 0 { 0.0 } else { lengths[i - 1] };
        joints.push(JointSpec::revolute(
            Pose::from_translation(Vec3::new(offset, 0.0, 0.0)),
            Vec3::z_axis(),
        ));
        capsules.push(if capsule_radius > 0.0 {
            vec![Capsule::new(
                Vec3::zeros(),
                Vec3::new(len, 0.0, 0.0),
                capsule_radius,
            )]
        } else {
            Vec::new()
        });
    }
    let tool = Pose::from_translation(Vec3::new(*lengths.last().unwrap(), 0.0, 0.0));
    RobotModel::new(Pose::identity(), joints, capsules, tool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn two_link() -> RobotModel {
        planar_arm(&[1.0, 1.0], 0.05).unwrap()
    }

    fn tip(robot: &RobotModel, q: &[f64]) -> Vec3 {
        let q = JointVector::new(robot, q.to_vec()).unwrap();
        forward_kinematics(robot, &q).unwrap().tooltip
    }

    #[test]
    fn planar_fk_examples() {
        let robot = two_link();
        assert!((tip(&robot, &[0.0, 0.0]) - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((tip(&robot, &[FRAC_PI_2, 0.0]) - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-12);
        // Hand composition: elbow at R(π/2)·(1,0) = (0,1); forearm direction
        // R(π/2 − π/2)·(1,0) = (1,0); tip = (1,1).
        assert!((tip(&robot, &[FRAC_PI_2, -FRAC_PI_2]) - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fk_rejects_dimension_mismatch() {
        let robot = two_link();
        let q = JointVector::from_vec_unchecked(vec![0.0; 3]);
        assert!(matches!(
            forward_kinematics(&robot, &q),
            Err(Error::InvalidArgument(_))
        ));
        assert!(JointVector::new(&robot, vec![0.0]).is_err());
    }

    #[test]
    fn joint_vector_checks_limits() {
        let robot = two_link();
        assert!(JointVector::new(&robot, vec![PI, -PI]).is_ok());
        assert!(JointVector::new(&robot, vec![PI + 1e-6, 0.0]).is_err());
        let q = JointVector::clamped(&robot, &[4.0, -4.0]).unwrap();
        assert_eq!(q.angles(), &[PI, -PI]);
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(two_link().reach_envelope(), 2.0);
        assert_eq!(planar_arm(&[0.5], 0.0).unwrap().reach_envelope(), 0.5);
    }

    #[test]
    fn fk_is_bitwise_deterministic() {
        let robot = two_link();
        let a = tip(&robot, &[0.123, -2.5]);
        let b = tip(&robot, &[0.123, -2.5]);
        assert_eq!(a.x.to_bits(), b.x.to_bits());
        assert_eq!(a.y.to_bits(), b.y.to_bits());
    }

    #[test]
    fn rejects_interleaved_fixed_joints() {
        let j = JointSpec::revolute(Pose::identity(), Vec3::z_axis());
        let err = RobotModel::new(
            Pose::identity(),
            vec![j.clone().fixed_in_sweep(), j.clone()],
            vec![],
            Pose::identity(),
        );
        assert!(err.is_err());
        let ok = RobotModel::new(
            Pose::identity(),
            vec![j.clone(), j.fixed_in_sweep()],
            vec![],
            Pose::identity(),
        )
        .unwrap();
        assert_eq!(ok.enumerated_count(), 1);
    }

    #[test]
    fn rejects_bad_limits_and_steps() {
        let j = JointSpec::revolute(Pose::identity(), Vec3::z_axis());
        let mk = |j: JointSpec| RobotModel::new(Pose::identity(), vec![j], vec![], Pose::identity());
        assert!(mk(j.clone().with_limits_deg(10.0, -10.0)).is_err());
        assert!(mk(j.clone().with_step_deg(0.0)).is_err());
        assert!(mk(j.with_step_deg(0.0).fixed_in_sweep()).is_ok());
    }

    #[test]
    fn robot_file_round_trip() {
        let robot = two_link();
        let text = robot.to_json_string();
        assert!(text.contains("limitsDeg"));
        let back = RobotModel::from_json_str(&text).unwrap();
        assert_eq!(back, robot);
    }

    #[test]
    fn robot_file_rejects_non_unit_axis() {
        let text = r#"{"joints":[{"axis":[0,0,2],"limitsDeg":[-180,180],"enumStepDeg":10}]}"#;
        assert!(RobotModel::from_json_str(text).is_err());
    }
}
