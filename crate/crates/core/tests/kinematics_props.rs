mod common;

use common::*;
use rand::Rng;
use reachvox::kinematics::{forward_kinematics, planar_arm, solve_ik, IkOptions, JointVector};
use reachvox::Vec3;

#[test]
fn envelope_matches_hand_summed_robot_file() {
    let robot = ur10e();
    // Offsets from data/ur10e.robot.json: 0.1807, 0, 0.6127,
    // |(0.57155, 0, 0.17415)|, 0.11985, 0.11655, tool 0.1.
    let by_hand = 0.1807
        + 0.6127
        + (0.57155f64 * 0.57155 + 0.17415 * 0.17415).sqrt()
        + 0.11985
        + 0.11655
        + 0.1;
    assert!((robot.reach_envelope() - by_hand).abs() < 1e-12);
}

#[test]
fn envelope_is_sound_for_random_configurations() {
    for robot in [ur10e(), planar_arm(&[0.6, 0.4], 0.02).unwrap(), spatial_three_joint(0.03)] {
        let mut rng = rng(7);
        let bound = robot.reach_envelope();
        let base = robot.base_pose().translation;
        for _ in 0..10_000 {
            let q = random_q(&robot, &mut rng);
            let tip = forward_kinematics(&robot, &q).unwrap().tooltip;
            assert!((tip - base).norm() <= bound + 1e-9);
        }
    }
}

#[test]
fn fk_is_bitwise_deterministic() {
    let robot = ur10e();
    let mut rng = rng(3);
    for _ in 0..100 {
        let q = random_q(&robot, &mut rng);
        let a = forward_kinematics(&robot, &q).unwrap().tooltip;
        let b = forward_kinematics(&robot, &q.clone()).unwrap().tooltip;
        for i in 0..3 {
            assert_eq!(a[i].to_bits(), b[i].to_bits());
        }
    }
}

#[test]
fn ik_reaches_fk_targets_from_perturbed_seeds() {
    let robot = ur10e();
    let mut rng = rng(11);
    let opts = IkOptions::default().with_tolerance(1e-3);
    let mut converged = 0;
    let n = 1000;
    for _ in 0..n {
        let q = random_q(&robot, &mut rng);
        let target = forward_kinematics(&robot, &q).unwrap().tooltip;
        let seed_angles: Vec<f64> = q.angles().iter().map(|a| a + rng.random_range(-0.3..0.3)).collect();
        let seed = JointVector::clamped(&robot, &seed_angles).unwrap();
        let sol = solve_ik(&robot, &target, &seed, &opts).unwrap();
        assert!(sol.joints.within_limits(&robot), "IK returned out-of-limit angles");
        let tip = forward_kinematics(&robot, &sol.joints).unwrap().tooltip;
        assert!(((tip - target).norm() - sol.residual).abs() < 1e-9);
        if sol.converged {
            assert!((tip - target).norm() <= 1e-3);
            converged += 1;
        }
    }
    assert!(converged as f64 / n as f64 >= 0.99, "only {converged}/{n} converged");
}

#[test]
fn ik_never_leaves_limits_even_when_target_is_unreachable() {
    let robot = ur10e();
    let mut rng = rng(5);
    for _ in 0..50 {
        let dir = random_point(&mut rng, 1.0).normalize();
        let target = dir * (robot.reach_envelope() + 0.5);
        let seed = random_q(&robot, &mut rng);
        let sol = solve_ik(&robot, &target, &seed, &IkOptions::default()).unwrap();
        assert!(!sol.converged);
        assert!(sol.joints.within_limits(&robot));
        assert!(sol.residual >= 0.5 - 1e-9);
    }
    let planar = planar_arm(&[1.0, 1.0], 0.05).unwrap();
    let seed = planar.rest_configuration();
    let sol = solve_ik(&planar, &Vec3::new(0.0, 0.0, 0.5), &seed, &IkOptions::default()).unwrap();
    assert!(!sol.converged);
}
