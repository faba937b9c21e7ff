//! Damped least squares on the 3-DOF position Jacobian.

use nalgebra::{Dyn, Matrix3, OMatrix, U3};

use super::{JointVector, RobotModel};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy)]
pub struct IkOptions {
    pub max_iters: usize,
    /// Position tolerance, meters.
    pub tolerance: f64,
    /// Damping λ in `Jᵀ(JJᵀ + λ²I)⁻¹`.
    pub damping: f64,
    /// Central-difference step for the numeric Jacobian, radians.
    pub fd_step: f64,
    /// Largest joint-space step per iteration (Euclidean norm), radians.
    pub max_step: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self {
            max_iters: 300,
            tolerance: 1e-4,
            damping: 0.05,
            fd_step: 1e-6,
            max_step: 0.5,
        }
    }
}

impl IkOptions {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

/// Result of an IK solve. When `converged` is false, `joints` is the best
/// configuration found and `residual` its remaining tooltip error.
#[derive(Debug, Clone)]
pub struct IkSolution {
    pub joints: JointVector,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn tooltip_raw(robot: &RobotModel, q: &[f64]) -> Vec3 {
    let mut current = *robot.base_pose();
    for (i, &angle) in q.iter().enumerate() {
        current = robot.link_pose(&current, i, angle);
    }
    robot.tooltip_from_last(&current)
}

fn position_jacobian(robot: &RobotModel, q: &mut [f64], h: f64) -> OMatrix<f64, U3, Dyn> {
    let n = q.len();
    let mut jac = OMatrix::<f64, U3, Dyn>::zeros(n);
    for i in 0..n {
        let orig = q[i];
        q[i] = orig + h;
        let plus = tooltip_raw(robot, q);
        q[i] = orig - h;
        let minus = tooltip_raw(robot, q);
        q[i] = orig;
        jac.set_column(i, &((plus - minus) / (2.0 * h)));
    }
    jac
}

/// Moves the tooltip onto `target` starting from `seed`.
///
/// Angles are clamped to joint limits after every step, so the returned
/// configuration always respects them. An unreachable target is reported
/// through `converged == false`, not as an error.
pub fn solve_ik(
    robot: &RobotModel,
    target: &Vec3,
    seed: &JointVector,
    options: &IkOptions,
) -> Result<IkSolution> {
    if !(options.tolerance > 0.0) {
        return Err(Error::invalid("IK tolerance must be positive"));
    }
    if !(options.fd_step > 0.0) {
        return Err(Error::invalid("IK finite-difference step must be positive"));
    }
    if !target.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("IK target must be finite"));
    }
    let mut q = JointVector::clamped(robot, seed.angles())?.into_inner();
    let joints = robot.joints();
    let lambda_sq = options.damping * options.damping;

    let mut error = target - tooltip_raw(robot, &q);
    let mut best = (error.norm(), q.clone());
    let mut iterations = 0;

    while iterations < options.max_iters && best.0 > options.tolerance {
        iterations += 1;
        let jac = position_jacobian(robot, &mut q, options.fd_step);
        let damped = &jac * jac.transpose() + Matrix3::identity() * lambda_sq;
        let Some(y) = damped.cholesky().map(|c| c.solve(&error)) else {
            break;
        };
        let mut dq = jac.transpose() * y;
        let step_norm = dq.norm();
        if step_norm > options.max_step {
            dq *= options.max_step / step_norm;
        }
        for (i, angle) in q.iter_mut().enumerate() {
            *angle = joints[i].clamp(*angle + dq[i]);
        }
        error = target - tooltip_raw(robot, &q);
        let residual = error.norm();
        if residual < best.0 {
            best = (residual, q.clone());
        }
    }

    let (residual, angles) = best;
    Ok(IkSolution {
        joints: JointVector::from_vec_unchecked(angles),
        residual,
        iterations,
        converged: residual <= options.tolerance,
    })
}
