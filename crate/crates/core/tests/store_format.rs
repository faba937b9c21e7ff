mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use reachvox::reachability::{ReachabilityMap, VoxelCoord, VoxelGrid, VoxelStatus};
use reachvox::scenario::{precompute_all, CraneSpec, MapSet, Scenario, WorkpieceConfig};
use reachvox::store::{decode_map_set, encode_map_set, read_map_set, write_map_set};
use reachvox::{Error, Vec3};

fn arb_map_set() -> impl Strategy<Value = MapSet> {
    (1u32..4, 1u32..3, -1.0..1.0f64, any::<u64>()).prop_map(|(rot, height, h_step, seed)| {
        let crane = CraneSpec {
            rotation_step_deg: 360.0 / rot as f64,
            rotation_count: rot,
            height_count: height,
            height_step: h_step,
            ..CraneSpec::default()
        };
        let mut rng = rng(seed);
        let maps = crane
            .configs()
            .map(|cfg| {
                let dims = [rng.random_range(1..6), rng.random_range(1..6), rng.random_range(1..6)];
                let origin = random_point(&mut rng, 3.0);
                let grid = VoxelGrid::new(origin, rng.random_range(0.01..0.5), dims).unwrap();
                let mut map = ReachabilityMap::new(grid);
                for c in grid.coords() {
                    match rng.random_range(0..3) {
                        0 => {}
                        1 => {
                            map.status.insert(c, VoxelStatus::Blocked);
                        }
                        _ => {
                            map.status.insert(c, VoxelStatus::Reachable);
                        }
                    }
                }
                (cfg, map)
            })
            .collect();
        MapSet { crane, maps }
    })
}

proptest! {
    #[test]
    fn random_map_sets_round_trip_exactly(set in arb_map_set()) {
        let bytes = encode_map_set(&set).unwrap();
        let back = decode_map_set(&bytes).unwrap();
        prop_assert_eq!(&back, &set);
        prop_assert_eq!(encode_map_set(&back).unwrap(), bytes);
    }
}

fn annulus_set() -> MapSet {
    let scenario = Scenario::load(data_dir().join("planar.scenario.json")).unwrap();
    let schedule = reachvox::reachability::StepSchedule::new(vec![3.0, 3.0]).unwrap();
    precompute_all(&scenario, &schedule, 1, |_, _| {}).unwrap()
}

#[test]
fn annulus_file_round_trips_and_is_deterministic() {
    let set = annulus_set();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.rvox");
    let b = dir.path().join("b.rvox");
    let n = write_map_set(&a, &set).unwrap();
    write_map_set(&b, &set).unwrap();
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(n as usize, bytes.len());
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(read_map_set(&a).unwrap(), set);
}

#[test]
fn zero_voxel_single_config_layout() {
    let grid = VoxelGrid::new(Vec3::zeros(), 0.05, [2, 2, 2]).unwrap();
    let set = MapSet {
        crane: CraneSpec::single(),
        maps: BTreeMap::from([(WorkpieceConfig::new(0, 0), ReachabilityMap::new(grid))]),
    };
    let bytes = encode_map_set(&set).unwrap();
    assert_eq!(bytes.len(), 26 + 48 + 4);
    assert_eq!(&bytes[..4], b"RVOX");
    assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
    assert_eq!(u32::from_le_bytes(bytes[70..74].try_into().unwrap()), 0);
}

#[test]
fn corrupted_files_never_decode() {
    let set = annulus_set();
    let good = encode_map_set(&set).unwrap();
    let mut rng = rng(41);
    let mut cases: Vec<Vec<u8>> = Vec::new();
    for _ in 0..10 {
        let mut b = good.clone();
        let at = rng.random_range(0..b.len());
        b[at] ^= 1 << rng.random_range(0..8);
        cases.push(b);
    }
    for _ in 0..10 {
        let cut = rng.random_range(0..good.len());
        cases.push(good[..cut].to_vec());
    }
    for (n, bad) in cases.iter().enumerate() {
        match decode_map_set(bad) {
            Err(Error::Parse { offset, .. }) => assert!(offset as usize <= bad.len(), "case {n}"),
            other => panic!("case {n} decoded to {other:?}"),
        }
    }
}

#[test]
fn status_and_order_violations_are_caught_even_with_valid_crc() {
    let grid = VoxelGrid::new(Vec3::zeros(), 1.0, [2, 1, 1]).unwrap();
    let mut map = ReachabilityMap::new(grid);
    map.status.insert(VoxelCoord::new(0, 0, 0), VoxelStatus::Reachable);
    map.status.insert(VoxelCoord::new(1, 0, 0), VoxelStatus::Blocked);
    let set = MapSet { crane: CraneSpec::single(), maps: BTreeMap::from([(WorkpieceConfig::new(0, 0), map)]) };
    let good = encode_map_set(&set).unwrap();
    let body = good.len() - 4;
    let reseal = |mut b: Vec<u8>| {
        let crc = crc32fast::hash(&b[..body]);
        b[body..].copy_from_slice(&crc.to_le_bytes());
        b
    };
    // First voxel record starts after the 26-byte header and 48-byte block header.
    let first = 26 + 48;
    let mut bad_status = good.clone();
    bad_status[first + 12] = 7;
    let mut swapped = good.clone();
    swapped[first..first + 4].copy_from_slice(&1i32.to_le_bytes());
    swapped[first + 13..first + 17].copy_from_slice(&0i32.to_le_bytes());
    let mut outside = good.clone();
    outside[first + 4..first + 8].copy_from_slice(&5i32.to_le_bytes());
    let mut version = good.clone();
    version[4] = 2;
    for (what, b) in [("status", bad_status), ("order", swapped), ("outside", outside), ("version", version)] {
        assert!(matches!(decode_map_set(&reseal(b)), Err(Error::Parse { .. })), "{what}");
    }
}
