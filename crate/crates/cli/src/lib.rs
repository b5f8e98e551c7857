//! Command-line front end for the compute-in-memory design-space
//! exploration engine: configuration handling, cost estimation,
//! frontier search and export, functional simulation checks, and
//! structural netlist generation.
//!
//! The binary (`dcim`) is a thin wrapper over [`commands::run_command`];
//! everything it does is reachable through this library, which is what the
//! integration and acceptance tests drive.

pub mod commands;
pub mod config;
pub mod error;
pub mod evaluator;
pub mod export;
pub mod filter;
pub mod kv;
pub mod techfile;
