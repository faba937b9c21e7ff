//! Binary map-set files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "RVOX" | u16 version = 1 | u16 rotationCount | u16 heightCount
//!        | f64 rotationStepDeg | f64 heightStep
//! per config, rotation-major then height:
//!        f64×3 grid origin | f64 cellSize | u32×3 dims | u32 voxelCount
//!        | voxelCount × (i32 i, i32 j, i32 k, u8 status)
//! u32 CRC-32 (IEEE) of every preceding byte
//! ```
//!
//! Voxel records are written in ascending `(i, j, k)` order and status is
//! 0 for blocked, 1 for reachable. The crane base pose is not stored;
//! decoded crane specs carry the identity pose.

use std::collections::BTreeMap;
use std::path::Path;

use crate::reachability::{ReachabilityMap, VoxelCoord, VoxelGrid, VoxelStatus};
use crate::scenario::{CraneSpec, MapSet};
use crate::{Error, Result, Vec3};

pub const MAGIC: &[u8; 4] = b"RVOX";
pub const VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 2 + 2 + 8 + 8;
const CONFIG_HEADER_LEN: usize = 8 * 3 + 8 + 4 * 3 + 4;
const VOXEL_LEN: usize = 4 * 3 + 1;

pub fn encode_map_set(set: &MapSet) -> Result<Vec<u8>> {
    set.check_complete()?;
    let crane = &set.crane;
    let rot = u16::try_from(crane.rotation_count)
        .map_err(|_| Error::invalid("rotation count exceeds u16"))?;
    let height = u16::try_from(crane.height_count)
        .map_err(|_| Error::invalid("height count exceeds u16"))?;

    let voxels: usize = set.maps.values().map(|m| m.status.len()).sum();
    let mut out = Vec::with_capacity(
        HEADER_LEN + set.maps.len() * CONFIG_HEADER_LEN + voxels * VOXEL_LEN + 4,
    );
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&rot.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    out.extend_from_slice(&crane.rotation_step_deg.to_le_bytes());
    out.extend_from_slice(&crane.height_step.to_le_bytes());

    for cfg in crane.configs() {
        let map = &set.maps[&cfg];
        let g = &map.grid;
        for v in g.origin.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&g.cell_size.to_le_bytes());
        for d in g.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        let count = u32::try_from(map.status.len())
            .map_err(|_| Error::invalid("too many voxels in one map"))?;
        out.extend_from_slice(&count.to_le_bytes());
        for (c, s) in &map.status {
            if !g.contains(c) {
                return Err(Error::invalid(format!("voxel {c:?} lies outside its grid")));
            }
            out.extend_from_slice(&c.i.to_le_bytes());
            out.extend_from_slice(&c.j.to_le_bytes());
            out.extend_from_slice(&c.k.to_le_bytes());
            out.push(match s {
                VoxelStatus::Blocked => 0,
                VoxelStatus::Reachable => 1,
            });
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

/// Writes `set` to `path`; returns the number of bytes written.
pub fn write_map_set(path: impl AsRef<Path>, set: &MapSet) -> Result<u64> {
    let path = path.as_ref();
    let bytes = encode_map_set(set)?;
    std::fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes.len() as u64)
}

pub fn read_map_set(path: impl AsRef<Path>) -> Result<MapSet> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_map_set(&bytes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::parse(
                self.pos,
                format!("truncated: need {n} bytes for {what}, {} left", self.bytes.len() - self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn i32(&mut self, what: &str) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let v = f64::from_le_bytes(self.take(8, what)?.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::parse(self.pos - 8, format!("{what} is not finite")));
        }
        Ok(v)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub fn decode_map_set(bytes: &[u8]) -> Result<MapSet> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::parse(0, "bad magic, expected \"RVOX\""));
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(Error::parse(4, format!("unsupported version {version}, expected {VERSION}")));
    }
    let rotation_count = r.u16("rotation count")? as u32;
    let height_count = r.u16("height count")? as u32;
    if rotation_count == 0 || height_count == 0 {
        return Err(Error::parse(6, "crane counts must be at least 1"));
    }
    let step_at = r.pos;
    let rotation_step_deg = r.f64("rotation step")?;
    let height_step = r.f64("height step")?;
    let crane = CraneSpec {
        rotation_step_deg,
        rotation_count,
        height_count,
        height_step,
        base_pose: Default::default(),
    };
    crane
        .validate()
        .map_err(|e| Error::parse(step_at, e.to_string()))?;

    let mut maps = BTreeMap::new();
    for cfg in crane.configs() {
        let block_at = r.pos;
        let origin = Vec3::new(r.f64("grid origin")?, r.f64("grid origin")?, r.f64("grid origin")?);
        let cell_at = r.pos;
        let cell_size = r.f64("cell size")?;
        let dims_at = r.pos;
        let dims = [r.u32("dims")?, r.u32("dims")?, r.u32("dims")?];
        let grid = VoxelGrid::new(origin, cell_size, dims).map_err(|e| {
            let at = if cell_size > 0.0 { dims_at } else { cell_at };
            Error::parse(at, e.to_string())
        })?;
        let count_at = r.pos;
        let count = r.u32("voxel count")? as usize;
        if count as u128 > grid.len() as u128 {
            return Err(Error::parse(count_at, format!("voxel count {count} exceeds grid size {}", grid.len())));
        }
        if count.saturating_mul(VOXEL_LEN) > r.remaining() {
            return Err(Error::parse(
                r.pos,
                format!(
                    "truncated voxel block for configuration ({}, {}) starting at {block_at}",
                    cfg.rot_index, cfg.height_index
                ),
            ));
        }
        let mut status = BTreeMap::new();
        let mut prev: Option<VoxelCoord> = None;
        for _ in 0..count {
            let at = r.pos;
            let c = VoxelCoord::new(r.i32("voxel i")?, r.i32("voxel j")?, r.i32("voxel k")?);
            if !grid.contains(&c) {
                return Err(Error::parse(at, format!("voxel {c:?} outside grid {dims:?}")));
            }
            if prev.is_some_and(|p| p >= c) {
                return Err(Error::parse(at, "voxel records not in ascending order"));
            }
            prev = Some(c);
            let s = match r.u8("voxel status")? {
                0 => VoxelStatus::Blocked,
                1 => VoxelStatus::Reachable,
                other => return Err(Error::parse(at + 12, format!("invalid status byte {other}"))),
            };
            status.insert(c, s);
        }
        maps.insert(
            cfg,
            ReachabilityMap {
                grid,
                status,
                meta: Default::default(),
            },
        );
    }

    let crc_at = r.pos;
    let stored = r.u32("checksum")?;
    if r.remaining() != 0 {
        return Err(Error::parse(r.pos, format!("{} trailing bytes after checksum", r.remaining())));
    }
    let actual = crc32fast::hash(&bytes[..crc_at]);
    if stored != actual {
        return Err(Error::parse(
            crc_at,
            format!("checksum mismatch: stored {stored:08x}, computed {actual:08x}"),
        ));
    }
    Ok(MapSet { crane, maps })
}
