//! Voxelized reachability maps for serial robot arms.
//!
//! The crate covers the whole offline pipeline: forward and inverse
//! kinematics over a joint chain ([`kinematics`]), capsule-versus-mesh and
//! self collision queries ([`collision`]), the hierarchical configuration
//! sweep that classifies voxels around a workpiece ([`reachability`]), the
//! crane/trial scenario layer ([`scenario`]) and the binary map-set file
//! format ([`store`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collision;
pub mod error;
pub mod kinematics;
pub mod reachability;
pub mod scenario;
pub mod store;

pub use error::{Error, Result};

/// World-space 3-vector, meters.
pub type Vec3 = nalgebra::Vector3<f64>;
