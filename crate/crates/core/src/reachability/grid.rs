use serde::{Deserialize, Serialize};

use crate::collision::{vec3_array, Aabb};
use crate::{Error, Result, Vec3};

/// Integer voxel coordinate. Orders lexicographically by `(i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VoxelCoord {
    pub i: i32,
    pub j: i32,
    pub k: i32,
}

impl VoxelCoord {
    pub const fn new(i: i32, j: i32, k: i32) -> Self {
        Self { i, j, k }
    }
}

/// Regular grid of cubic cells. Cell `(i, j, k)` spans
/// `origin + cell_size·[i, i+1) × [j, j+1) × [k, k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VoxelGrid {
    #[serde(with = "vec3_array")]
    pub origin: Vec3,
    pub cell_size: f64,
    pub dims: [u32; 3],
}

impl VoxelGrid {
    pub fn new(origin: Vec3, cell_size: f64, dims: [u32; 3]) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::invalid(format!("cell size must be positive, got {cell_size}")));
        }
        if dims.iter().any(|&d| d == 0 || d > i32::MAX as u32) {
            return Err(Error::invalid(format!("grid dims must be >= 1, got {dims:?}")));
        }
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        Ok(Self {
            origin,
            cell_size,
            dims,
        })
    }

    /// Smallest grid with origin at `min` covering the box up to `max`.
    pub fn covering(min: Vec3, max: Vec3, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) {
            return Err(Error::invalid("cell size must be positive"));
        }
        let dims = [0, 1, 2].map(|a| {
            let cells = (max[a] - min[a]) / cell_size;
            (cells - 1e-9).ceil().max(1.0) as u32
        });
        Self::new(min, cell_size, dims)
    }

    /// Grid of whole cells centered on `bounds`, padded by `margin` on
    /// every side.
    pub fn centered_on(bounds: &Aabb, margin: f64, cell_size: f64) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("cannot center a grid on empty bounds"));
        }
        if !(cell_size > 0.0) {
            return Err(Error::invalid("cell size must be positive"));
        }
        let extent = bounds.extent().add_scalar(2.0 * margin);
        let dims = [0, 1, 2].map(|a| ((extent[a] / cell_size) - 1e-9).ceil().max(1.0) as u32);
        let size = Vec3::new(dims[0] as f64, dims[1] as f64, dims[2] as f64) * cell_size;
        Self::new(bounds.center() - size * 0.5, cell_size, dims)
    }

    pub fn len(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: &VoxelCoord) -> bool {
        c.i >= 0
            && c.j >= 0
            && c.k >= 0
            && (c.i as u32) < self.dims[0]
            && (c.j as u32) < self.dims[1]
            && (c.k as u32) < self.dims[2]
    }

    /// Cell containing `p`; points on a shared face belong to the higher
    /// index. `None` outside the grid.
    pub fn voxel_of_point(&self, p: &Vec3) -> Option<VoxelCoord> {
        let mut idx = [0i32; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.cell_size).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            idx[a] = f as i32;
        }
        Some(VoxelCoord::new(idx[0], idx[1], idx[2]))
    }

    pub fn cell_center(&self, c: &VoxelCoord) -> Vec3 {
        self.origin + Vec3::new(c.i as f64 + 0.5, c.j as f64 + 0.5, c.k as f64 + 0.5) * self.cell_size
    }

    pub fn cell_bounds(&self, c: &VoxelCoord) -> Aabb {
        let min = self.origin + Vec3::new(c.i as f64, c.j as f64, c.k as f64) * self.cell_size;
        Aabb {
            min,
            max: min.add_scalar(self.cell_size),
        }
    }

    /// Row-major linear index (`k` fastest) of an in-grid coordinate.
    #[inline]
    pub fn linear_index(&self, c: &VoxelCoord) -> usize {
        (c.i as usize * self.dims[1] as usize + c.j as usize) * self.dims[2] as usize + c.k as usize
    }

    pub fn coord_of_index(&self, index: usize) -> VoxelCoord {
        let k = index % self.dims[2] as usize;
        let rest = index / self.dims[2] as usize;
        let j = rest % self.dims[1] as usize;
        let i = rest / self.dims[1] as usize;
        VoxelCoord::new(i as i32, j as i32, k as i32)
    }

    /// All coordinates in ascending order.
    pub fn coords(&self) -> impl Iterator<Item = VoxelCoord> + '_ {
        (0..self.len()).map(|i| self.coord_of_index(i))
    }

    /// Half the cell's space diagonal.
    pub fn half_diagonal(&self) -> f64 {
        self.cell_size * 3f64.sqrt() / 2.0
    }
}
