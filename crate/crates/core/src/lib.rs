//! Boolean formulas, branching programs, and average-case solvers for the
//! Orthogonal Vectors problem.
//!
//! The crate provides:
//!
//! - a tree-formula IR with evaluation, size accounting, and constant
//!   propagation ([`formula`], [`simplify`]);
//! - branching programs with evaluation, restriction, and out-degree-1
//!   elimination ([`bp`]);
//! - the explicit OV constructions and the brute-force oracle ([`ov`]);
//! - the DeMorgan-formula-to-branching-program compiler, restrictions, and
//!   the middle-layer hard-function encoding ([`transforms`]);
//! - the OV(p) average-case machinery: phase-transition classification,
//!   light-vector analysis, the grouped one-sided formula, and a Monte Carlo
//!   harness ([`avgcase`]);
//! - projection reductions to batch search problems ([`reductions`]);
//! - exhaustive small-formula counting demonstrations ([`counting`]).
//!
//! Everything is deterministic given explicit seeds; all structures are
//! immutable after construction and safe to share across threads.

pub mod avgcase;
pub mod bp;
pub mod counting;
pub mod error;
pub mod formula;
pub mod formula_text;
pub mod ov;
pub mod reductions;
pub mod simplify;
pub mod transforms;

mod testutil;

pub use error::{Error, Result};
pub use formula::{Discipline, Formula, FormulaBuilder, GateKind, SizeMetrics, VariableId};
pub use ov::OvInstance;
