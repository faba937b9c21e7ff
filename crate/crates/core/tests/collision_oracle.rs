mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use reachvox::collision::{
    build_mesh_accelerator, capsule_mesh_intersects, distance_point_mesh, robot_self_collides,
    Capsule, MeshIndex, TriMesh,
};
use reachvox::kinematics::{forward_kinematics, planar_arm, Pose};
use reachvox::scenario::procedural::{box_mesh, engine_surrogate};
use reachvox::Vec3;

fn brute_capsule_hit(cap: &Capsule, mesh: &TriMesh) -> bool {
    (0..mesh.triangles().len()).any(|t| {
        let [a, b, c] = mesh.triangle(t);
        reachvox::collision::segment_triangle_distance_sq(&cap.a, &cap.b, &a, &b, &c)
            < cap.radius * cap.radius
    })
}

#[test]
fn point_distance_matches_brute_force_on_random_mesh() {
    let mut rng = rng(21);
    let mesh = random_mesh(&mut rng, 50, 1.0);
    let index = build_mesh_accelerator(mesh.clone());
    for _ in 0..1000 {
        let p = random_point(&mut rng, 2.0);
        let fast = index.distance(&p).unwrap();
        let slow = mesh.brute_distance(&p).unwrap();
        assert!((fast - slow).abs() <= 1e-9, "{fast} vs {slow} at {p:?}");
    }
}

#[test]
fn posed_distance_matches_brute_force_in_local_frame() {
    let mut rng = rng(22);
    let mesh = random_mesh(&mut rng, 200, 0.5);
    let index = build_mesh_accelerator(mesh.clone());
    let pose = Pose::from_axis_angle(&nalgebra::Unit::new_normalize(Vec3::new(1.0, 2.0, 0.5)), 0.7)
        .compose(&Pose::from_translation(Vec3::new(0.3, -0.2, 1.0)));
    for _ in 0..1000 {
        let p = random_point(&mut rng, 2.0);
        let fast = distance_point_mesh(&p, &index, &pose).unwrap();
        let slow = mesh.brute_distance(&pose.inverse_transform_point(&p)).unwrap();
        assert!((fast - slow).abs() <= 1e-9);
    }
}

#[test]
fn capsule_queries_match_brute_force() {
    let mut rng = rng(23);
    let mesh = random_mesh(&mut rng, 50, 1.0);
    let index = build_mesh_accelerator(mesh.clone());
    let mut hits = 0;
    for _ in 0..1000 {
        let a = random_point(&mut rng, 1.5);
        let b = a + random_point(&mut rng, 0.5);
        let cap = Capsule::new(a, b, rng.random_range(0.001..0.2));
        let fast = capsule_mesh_intersects(&cap, &Pose::identity(), &index, &Pose::identity());
        assert_eq!(fast, brute_capsule_hit(&cap, &mesh));
        hits += fast as usize;
    }
    // Both outcomes must be exercised for the comparison to mean anything.
    assert!(hits > 50 && hits < 950, "{hits}");
}

#[test]
fn capsule_pairs_match_segment_distance_oracle() {
    let mut rng = rng(24);
    for _ in 0..100 {
        let c1 = Capsule::new(random_point(&mut rng, 1.0), random_point(&mut rng, 1.0), rng.random_range(0.01..0.3));
        let c2 = Capsule::new(random_point(&mut rng, 1.0), random_point(&mut rng, 1.0), rng.random_range(0.01..0.3));
        // Oracle: dense sampling of both segments bounds the true distance
        // from above; the analytic minimum must not exceed it.
        let mut sampled = f64::INFINITY;
        for i in 0..=200 {
            let p = c1.a + (c1.b - c1.a) * (i as f64 / 200.0);
            for j in 0..=200 {
                let q = c2.a + (c2.b - c2.a) * (j as f64 / 200.0);
                sampled = sampled.min((p - q).norm());
            }
        }
        let exact = reachvox::collision::segment_segment_distance_sq(&c1.a, &c1.b, &c2.a, &c2.b).sqrt();
        assert!(exact <= sampled + 1e-12);
        assert!(sampled - exact < 0.02, "{sampled} vs {exact}");
        let r = c1.radius + c2.radius;
        if (exact - r).abs() > 0.02 {
            assert_eq!(c1.intersects(&c2), exact < r);
        }
    }
}

#[test]
fn rebuilding_the_index_is_deterministic() {
    let mut rng = rng(25);
    let mesh = random_mesh(&mut rng, 300, 1.0);
    let a = MeshIndex::build(mesh.clone());
    let b = MeshIndex::build(mesh);
    for _ in 0..200 {
        let p = random_point(&mut rng, 2.0);
        assert_eq!(a.distance(&p).unwrap().to_bits(), b.distance(&p).unwrap().to_bits());
    }
}

#[test]
fn engine_surrogate_index_agrees_with_brute_force() {
    let mesh = engine_surrogate();
    let index = build_mesh_accelerator(mesh.clone());
    let mut rng = rng(26);
    for _ in 0..1000 {
        let p = random_point(&mut rng, 0.6);
        assert!((index.distance(&p).unwrap() - mesh.brute_distance(&p).unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn bundled_robots_are_collision_free_at_rest() {
    for robot in [ur10e(), planar_arm(&[0.6, 0.4], 0.02).unwrap(), spatial_three_joint(0.03)] {
        let q = robot.rest_configuration();
        let fk = forward_kinematics(&robot, &q).unwrap();
        assert!(!robot_self_collides(&robot, &fk.link_poses));
    }
}

fn arb_vec(half: f64) -> impl Strategy<Value = Vec3> {
    (-half..half, -half..half, -half..half).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn arb_capsule() -> impl Strategy<Value = Capsule> {
    (arb_vec(1.0), arb_vec(1.0), 0.0..0.4f64).prop_map(|(a, b, r)| Capsule::new(a, b, r))
}

proptest! {
    #[test]
    fn capsule_intersection_is_symmetric(c1 in arb_capsule(), c2 in arb_capsule()) {
        prop_assert_eq!(c1.intersects(&c2), c2.intersects(&c1));
    }

    #[test]
    fn growing_a_capsule_never_clears_a_hit(
        c1 in arb_capsule(),
        c2 in arb_capsule(),
        extra in 0.0..0.5f64,
    ) {
        if c1.intersects(&c2) {
            prop_assert!(c1.inflated(extra).intersects(&c2));
        }
    }

    #[test]
    fn growing_a_capsule_never_clears_a_mesh_hit(
        cap in arb_capsule(),
        extra in 0.0..0.5f64,
        center in arb_vec(0.5),
    ) {
        let index = build_mesh_accelerator(box_mesh(center, Vec3::new(0.2, 0.3, 0.1)));
        let id = Pose::identity();
        if capsule_mesh_intersects(&cap, &id, &index, &id) {
            prop_assert!(capsule_mesh_intersects(&cap.inflated(extra), &id, &index, &id));
        }
    }
}
