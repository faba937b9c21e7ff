//! Median-split bounding volume hierarchy over a triangle mesh.

use super::geometry::{point_triangle_distance_sq, segment_triangle_distance_sq, Aabb};
use super::mesh::TriMesh;
use crate::{Error, Result, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: u32, count: u32 },
    Inner { bounds: Aabb, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// A mesh together with its triangle hierarchy. Queries are in the mesh's
/// local frame; callers transform into it.
#[derive(Debug, Clone)]
pub struct MeshIndex {
    mesh: TriMesh,
    nodes: Vec<Node>,
    /// Triangle indices permuted so every leaf covers a contiguous run.
    order: Vec<u32>,
    tris: Vec<[Vec3; 3]>,
}

impl MeshIndex {
    pub fn build(mesh: TriMesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.triangles().len()).map(|i| mesh.triangle(i)).collect();
        let boxes: Vec<Aabb> = tris.iter().map(|t| Aabb::from_points(t.iter())).collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build_node(&mut nodes, &mut order, 0, &boxes, &centroids);
        }
        Self {
            mesh,
            nodes,
            order,
            tris,
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map(|n| *n.bounds()).unwrap_or_else(Aabb::empty)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Exact distance from a local point to the mesh surface.
    pub fn distance(&self, p: &Vec3) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::invalid("distance query against an empty mesh"));
        }
        let mut best = f64::INFINITY;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.bounds().distance_sq_to_point(p) >= best {
                continue;
            }
            match *node {
                Node::Leaf { start, count, .. } => {
                    for &t in &self.order[start as usize..(start + count) as usize] {
                        let [a, b, c] = &self.tris[t as usize];
                        best = best.min(point_triangle_distance_sq(p, a, b, c));
                    }
                }
                Node::Inner { left, right, .. } => {
                    // Nearer child last so it is popped first.
                    let dl = self.nodes[left as usize].bounds().distance_sq_to_point(p);
                    let dr = self.nodes[right as usize].bounds().distance_sq_to_point(p);
                    if dl < dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        Ok(best.sqrt())
    }

    /// True iff some triangle lies strictly closer than `radius` to the
    /// local segment `pq`.
    pub fn segment_within(&self, p: &Vec3, q: &Vec3, radius: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let r_sq = radius * radius;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if !node.bounds().inflated(radius).intersects_segment(p, q) {
                continue;
            }
            match *node {
                Node::Leaf { start, count, .. } => {
                    for &t in &self.order[start as usize..(start + count) as usize] {
                        let [a, b, c] = &self.tris[t as usize];
                        if segment_triangle_distance_sq(p, q, a, b, c) < r_sq {
                            return true;
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    start: usize,
    boxes: &[Aabb],
    centroids: &[Vec3],
) -> u32 {
    let bounds = order
        .iter()
        .fold(Aabb::empty(), |acc, &t| acc.merge(&boxes[t as usize]));
    let id = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            bounds,
            start: start as u32,
            count: order.len() as u32,
        });
        return id;
    }
    let spread = Aabb::from_points(order.iter().map(|&t| &centroids[t as usize])).extent();
    let axis = if spread.x >= spread.y && spread.x >= spread.z {
        0
    } else if spread.y >= spread.z {
        1
    } else {
        2
    };
    order.sort_by(|&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let mid = order.len() / 2;
    // Placeholder, patched once both children exist.
    nodes.push(Node::Leaf {
        bounds,
        start: 0,
        count: 0,
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(nodes, lo, start, boxes, centroids);
    let right = build_node(nodes, hi, start + mid, boxes, centroids);
    nodes[id as usize] = Node::Inner {
        bounds,
        left,
        right,
    };
    id
}
