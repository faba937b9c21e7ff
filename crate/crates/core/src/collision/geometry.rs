//! Exact closest-point and distance routines for points, segments,
//! triangles and boxes.

use serde::{Deserialize, Serialize};

use crate::kinematics::Pose;
use crate::Vec3;

/// Segment `a`–`b` swept by a sphere of `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    #[serde(with = "vec3_array")]
    pub a: Vec3,
    #[serde(with = "vec3_array")]
    pub b: Vec3,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Vec3, b: Vec3, radius: f64) -> Self {
        Self { a, b, radius }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(format!("capsule radius must be positive, got {}", self.radius));
        }
        if !self.a.iter().chain(self.b.iter()).all(|v| v.is_finite()) {
            return Err("capsule endpoints must be finite".into());
        }
        Ok(())
    }

    pub fn transformed(&self, pose: &Pose) -> Capsule {
        Capsule {
            a: pose.transform_point(&self.a),
            b: pose.transform_point(&self.b),
            radius: self.radius,
        }
    }

    pub fn inflated(&self, by: f64) -> Capsule {
        Capsule {
            radius: self.radius + by,
            ..*self
        }
    }

    pub fn intersects(&self, other: &Capsule) -> bool {
        let r = self.radius + other.radius;
        // Fixed argument order keeps the floating-point result symmetric.
        let key = |c: &Capsule| [c.a.x, c.a.y, c.a.z, c.b.x, c.b.y, c.b.z];
        let (s, o) = if key(self) <= key(other) { (self, other) } else { (other, self) };
        segment_segment_distance_sq(&s.a, &s.b, &o.a, &o.b) < r * r
    }
}

pub(crate) mod vec3_array {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Vec3;

    pub fn serialize<S: Serializer>(v: &Vec3, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec3, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Vec3::from(a))
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn inflated(&self, by: f64) -> Aabb {
        Aabb {
            min: self.min.add_scalar(-by),
            max: self.max.add_scalar(by),
        }
    }

    pub fn distance_sq_to_point(&self, p: &Vec3) -> f64 {
        let mut d = 0.0;
        for i in 0..3 {
            let v = if p[i] < self.min[i] {
                self.min[i] - p[i]
            } else if p[i] > self.max[i] {
                p[i] - self.max[i]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }

    /// Slab test: does the closed segment `p`–`q` touch this box?
    pub fn intersects_segment(&self, p: &Vec3, q: &Vec3) -> bool {
        let d = q - p;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for i in 0..3 {
            if d[i].abs() < 1e-300 {
                if p[i] < self.min[i] || p[i] > self.max[i] {
                    return false;
                }
            } else {
                let inv = 1.0 / d[i];
                let mut ta = (self.min[i] - p[i]) * inv;
                let mut tb = (self.max[i] - p[i]) * inv;
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }

    /// Box of the transformed corners.
    pub fn transformed(&self, pose: &Pose) -> Aabb {
        let mut out = Aabb::empty();
        for i in 0..8 {
            let corner = Vec3::new(
                if i & 1 == 0 { self.min.x } else { self.max.x },
                if i & 2 == 0 { self.min.y } else { self.max.y },
                if i & 4 == 0 { self.min.z } else { self.max.z },
            );
            out.grow(&pose.transform_point(&corner));
        }
        out
    }
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn point_triangle_distance_sq(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (p - closest_point_on_triangle(p, a, b, c)).norm_squared()
}

pub fn point_segment_distance_sq(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    if len_sq == 0.0 {
        return (p - a).norm_squared();
    }
    let t = ((p - a).dot(&ab) / len_sq).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm_squared()
}

/// Squared distance between segments `p1q1` and `p2q2`.
pub fn segment_segment_distance_sq(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    const EPS: f64 = 1e-18;
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);

    let (s, t);
    if a <= EPS && e <= EPS {
        return r.norm_squared();
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > EPS * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    let direct = (c1 - c2).norm_squared();
    // Parallel and near-parallel pairs: the clamped solution above can miss
    // the true minimum, so also consider the endpoint projections.
    direct
        .min(point_segment_distance_sq(p1, p2, q2))
        .min(point_segment_distance_sq(q1, p2, q2))
        .min(point_segment_distance_sq(p2, p1, q1))
        .min(point_segment_distance_sq(q2, p1, q1))
}

/// Whether segment `pq` crosses the triangle's interior or boundary.
fn segment_crosses_triangle(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let n = (b - a).cross(&(c - a));
    let dp = n.dot(&(p - a));
    let dq = n.dot(&(q - a));
    if (dp > 0.0 && dq > 0.0) || (dp < 0.0 && dq < 0.0) || dp == dq {
        // Same side, or parallel to the plane: edge/endpoint tests cover it.
        return false;
    }
    let t = dp / (dp - dq);
    let x = p + (q - p) * t;
    let c0 = (b - a).cross(&(x - a)).dot(&n);
    let c1 = (c - b).cross(&(x - b)).dot(&n);
    let c2 = (a - c).cross(&(x - c)).dot(&n);
    (c0 >= 0.0 && c1 >= 0.0 && c2 >= 0.0) || (c0 <= 0.0 && c1 <= 0.0 && c2 <= 0.0)
}

/// Squared distance between segment `pq` and triangle `abc`.
pub fn segment_triangle_distance_sq(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    if segment_crosses_triangle(p, q, a, b, c) {
        return 0.0;
    }
    point_triangle_distance_sq(p, a, b, c)
        .min(point_triangle_distance_sq(q, a, b, c))
        .min(segment_segment_distance_sq(p, q, a, b))
        .min(segment_segment_distance_sq(p, q, b, c))
        .min(segment_segment_distance_sq(p, q, c, a))
}
