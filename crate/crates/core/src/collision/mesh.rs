//! Triangle meshes and their STL/OBJ loaders.

use std::collections::HashMap;
use std::path::Path;

use super::geometry::{point_triangle_distance_sq, segment_triangle_distance_sq, Aabb};
use crate::{Error, Result, Vec3};

const DEGENERATE_AREA: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Validates indices and drops zero-area triangles with a warning.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("mesh vertex coordinates must be finite"));
        }
        let n = vertices.len() as u32;
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::invalid(format!(
                "triangle {t:?} references a vertex beyond {n}"
            )));
        }
        let before = triangles.len();
        let triangles: Vec<[u32; 3]> = triangles
            .into_iter()
            .filter(|t| {
                let [a, b, c] = t.map(|i| vertices[i as usize]);
                (b - a).cross(&(c - a)).norm() * 0.5 > DEGENERATE_AREA
            })
            .collect();
        if triangles.len() != before {
            log::warn!(
                "dropped {} degenerate triangle(s) from mesh",
                before - triangles.len()
            );
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            triangles: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, index: usize) -> [Vec3; 3] {
        self.triangles[index].map(|i| self.vertices[i as usize])
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(
            self.triangles
                .iter()
                .flat_map(|t| t.iter().map(|&i| &self.vertices[i as usize])),
        )
    }

    /// Appends another mesh's triangles.
    pub fn merge(&mut self, other: &TriMesh) {
        let offset = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
    }

    /// Exact distance from a mesh-local point to the surface, checking
    /// every triangle.
    pub fn brute_distance(&self, p: &Vec3) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::invalid("distance query against an empty mesh"));
        }
        Ok(self
            .triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                point_triangle_distance_sq(p, &a, &b, &c)
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt())
    }

    /// Minimum distance from segment `pq` (mesh-local) to any triangle.
    pub fn brute_segment_distance(&self, p: &Vec3, q: &Vec3) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                segment_triangle_distance_sq(p, q, &a, &b, &c)
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        let parsed = match ext.as_deref() {
            Some("stl") => parse_stl(&bytes),
            Some("obj") => std::str::from_utf8(&bytes)
                .map_err(|e| Error::invalid(format!("OBJ is not UTF-8: {e}")))
                .and_then(parse_obj),
            _ => Err(Error::invalid("mesh file must have an .stl or .obj extension")),
        };
        parsed.map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn to_obj_string(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }
}

/// Wavefront OBJ: `v` and triangular `f` records. Other records are
/// skipped with one warning per record kind.
pub fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut warned: Vec<String> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let kind = parts.next().unwrap_or_default();
        let bad = |what: &str| Error::invalid(format!("OBJ line {}: {what}", lineno + 1));
        match kind {
            "v" => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|_| bad("bad vertex coordinate")))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(bad("vertex needs 3 coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            "f" => {
                let idx: Vec<u32> = parts
                    .map(|tok| {
                        let first = tok.split('/').next().unwrap_or_default();
                        let raw: i64 = first.parse().map_err(|_| bad("bad face index"))?;
                        let resolved = if raw < 0 {
                            vertices.len() as i64 + raw
                        } else {
                            raw - 1
                        };
                        u32::try_from(resolved).map_err(|_| bad("face index out of range"))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(bad("only triangular faces are supported"));
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            other => {
                if !warned.iter().any(|w| w == other) {
                    log::warn!("ignoring OBJ record kind `{other}`");
                    warned.push(other.to_owned());
                }
            }
        }
    }
    TriMesh::new(vertices, triangles)
}

/// Binary or ASCII STL. Coincident vertices are merged.
pub fn parse_stl(bytes: &[u8]) -> Result<TriMesh> {
    let is_binary = bytes.len() >= 84 && {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        bytes.len() == 84 + n * 50
    };
    let mut soup: Vec<[Vec3; 3]> = Vec::new();
    if is_binary {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        for i in 0..n {
            let rec = &bytes[84 + i * 50..84 + (i + 1) * 50];
            let f = |k: usize| f32::from_le_bytes(rec[k..k + 4].try_into().unwrap()) as f64;
            let v = |base: usize| Vec3::new(f(base), f(base + 4), f(base + 8));
            soup.push([v(12), v(24), v(36)]);
        }
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::invalid("STL is neither binary nor ASCII"))?;
        if !text.trim_start().starts_with("solid") {
            return Err(Error::invalid("ASCII STL must start with `solid`"));
        }
        let mut current: Vec<Vec3> = Vec::new();
        for line in text.lines() {
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("vertex") => {
                    let c: Vec<f64> = parts
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::invalid("bad STL vertex"))?;
                    if c.len() != 3 {
                        return Err(Error::invalid("STL vertex needs 3 coordinates"));
                    }
                    current.push(Vec3::new(c[0], c[1], c[2]));
                }
                Some("endfacet") => {
                    if current.len() != 3 {
                        return Err(Error::invalid("STL facet must have 3 vertices"));
                    }
                    soup.push([current[0], current[1], current[2]]);
                    current.clear();
                }
                _ => {}
            }
        }
    }
    let mut index: HashMap<[u64; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let triangles = soup
        .iter()
        .map(|tri| {
            tri.map(|v| {
                let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
                *index.entry(key).or_insert_with(|| {
                    vertices.push(v);
                    (vertices.len() - 1) as u32
                })
            })
        })
        .collect();
    TriMesh::new(vertices, triangles)
}
