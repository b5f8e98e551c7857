//! Core engine for exploring bit-serial compute-in-memory macro designs.
//!
//! Everything in this crate is deterministic and allocation-only: costs are
//! held in exact fixed-point gate units, randomness comes from an explicit
//! seeded generator, and no module performs IO. The companion CLI crate owns
//! file formats, configuration, and parallel evaluation.
//!
//! Module map:
//! - [`techlib`]: gate-normalized cell costs and closed-form logic module costs
//! - [`costmodel`]: design points and full-macro area/delay/energy/throughput
//! - [`dse`]: multi-objective search (NSGA-II), exhaustive enumeration,
//!   Pareto utilities, hypervolume
//! - [`funcsim`]: bit-accurate functional simulation (integer and
//!   pre-aligned floating point) with exact oracles in mind
//! - [`rtlgen`]: structural netlist generation, Verilog serialization, cell
//!   tallies, and stage timing that reconcile against the cost model

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod costmodel;
pub mod dse;
pub mod funcsim;
pub mod rtlgen;
pub mod techlib;
