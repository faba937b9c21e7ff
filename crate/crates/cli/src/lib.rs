//! `reachvox` command line: map precomputation, inspection, oracle checks
//! and the HTTP service used by the viewer.

pub mod api;
pub mod cli;
pub mod oracle;
pub mod service;

pub use cli::run;
