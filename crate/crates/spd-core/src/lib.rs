//! Compiler, cycle-accurate simulator, and parallelism design-space models
//! for the SPD stream-processing language.
//!
//! SPD describes stream-computing hardware as data-flow graphs: equation
//! nodes lower to pipelined floating-point operators, HDL nodes instantiate
//! existing modules with statically known delays, and hierarchical
//! composition cascades processing elements. This crate provides:
//!
//! - the frontend (preprocess, parse, validate, canonical printing),
//! - elaboration into delay-balanced DFGs with operator census and
//!   DOT/netlist export,
//! - behavioral models for the stream primitive library,
//! - a cycle-accurate stream simulator with a memory-bandwidth stall model,
//! - analytical performance/resource models and (n, m) design-space
//!   exploration,
//! - a lattice-Boltzmann benchmark corpus with a scalar oracle.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the command
//! line live in the companion `spd-cli` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod ast;
pub mod census;
pub mod dfg;
pub mod diag;
pub mod dot;
pub mod elaborate;
pub mod equalize;
pub mod lexer;
pub mod library;
pub mod netlist;
pub mod preprocess;
pub mod parser;
pub mod primitives;
pub mod printer;
pub mod stream;
pub mod validate;

pub use ast::SpdModule;
pub use census::census;
pub use dfg::{Dfg, OpCensus, OpLatencies};
pub use diag::Diagnostic;
pub use dot::{export_dot, DotStyle};
pub use elaborate::{elaborate, ElabOptions, Elaborated, Flatten};
pub use equalize::equalize_delays;
pub use library::ModuleLibrary;
pub use netlist::{export_netlist, import_netlist};
pub use parser::{parse_expr, parse_module};
pub use preprocess::preprocess;
pub use printer::print_module;
pub use stream::{PortBinding, StreamElement, StreamSet};
pub use validate::validate;
