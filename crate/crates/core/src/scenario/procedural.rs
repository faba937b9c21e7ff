//! Procedurally generated workpieces.

use crate::collision::TriMesh;
use crate::Vec3;

/// Axis-aligned box, outward-facing triangles.
pub fn box_mesh(center: Vec3, half_extents: Vec3) -> TriMesh {
    let h = half_extents;
    let vertices: Vec<Vec3> = (0..8)
        .map(|i| {
            center
                + Vec3::new(
                    if i & 1 == 0 { -h.x } else { h.x },
                    if i & 2 == 0 { -h.y } else { h.y },
                    if i & 4 == 0 { -h.z } else { h.z },
                )
        })
        .collect();
    let triangles = vec![
        [0, 2, 1], [1, 2, 3], // -z
        [4, 5, 6], [5, 7, 6], // +z
        [0, 1, 4], [1, 5, 4], // -y
        [2, 6, 3], [3, 6, 7], // +y
        [0, 4, 2], [2, 4, 6], // -x
        [1, 3, 5], [3, 7, 5], // +x
    ];
    TriMesh::new(vertices, triangles).expect("box mesh is well formed")
}

/// Union of boxes as one mesh (touching faces are kept as-is).
pub fn boxes_mesh(boxes: &[(Vec3, Vec3)]) -> TriMesh {
    let mut mesh = TriMesh::empty();
    for (center, half) in boxes {
        mesh.merge(&box_mesh(*center, *half));
    }
    mesh
}

/// Box parts of the engine-block stand-in, as `(center, half_extents)`.
///
/// A crankcase slab with three cylinder heads on top (the 8 cm gaps
/// between them form open channels), an oil pan underneath and an
/// accessory bracket on the +y side. About 0.6 × 0.52 × 0.54 m, centered
/// near the origin.
pub fn engine_surrogate_parts() -> Vec<(Vec3, Vec3)> {
    vec![
        (Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.30, 0.20, 0.10)),
        (Vec3::new(-0.20, 0.0, 0.20), Vec3::new(0.06, 0.15, 0.10)),
        (Vec3::new(0.0, 0.0, 0.20), Vec3::new(0.06, 0.15, 0.10)),
        (Vec3::new(0.20, 0.0, 0.20), Vec3::new(0.06, 0.15, 0.10)),
        (Vec3::new(0.0, 0.0, -0.17), Vec3::new(0.22, 0.15, 0.07)),
        (Vec3::new(0.05, 0.26, 0.0), Vec3::new(0.06, 0.06, 0.06)),
    ]
}

pub fn engine_surrogate() -> TriMesh {
    boxes_mesh(&engine_surrogate_parts())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_normals_point_outward() {
        let mesh = box_mesh(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.5, 0.25, 1.0));
        let center = Vec3::new(1.0, 2.0, 3.0);
        for i in 0..mesh.triangles().len() {
            let [a, b, c] = mesh.triangle(i);
            let n = (b - a).cross(&(c - a));
            let centroid = (a + b + c) / 3.0;
            assert!(n.dot(&(centroid - center)) > 0.0, "triangle {i} faces inward");
        }
    }

    #[test]
    fn engine_has_expected_size() {
        let mesh = engine_surrogate();
        assert_eq!(mesh.triangles().len(), 6 * 12);
        let b = mesh.aabb();
        assert!((b.min.z + 0.24).abs() < 1e-12 && (b.max.z - 0.30).abs() < 1e-12);
        assert!((b.max.y - 0.32).abs() < 1e-12);
    }
}
