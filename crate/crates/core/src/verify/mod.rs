//! Invariant checker, bound functions, oracle and differential fuzzing.

pub mod bounds;
mod check;
mod fuzz;
mod oracle;

pub use bounds::{nomeld_degree_bound, positional_degree_bound, rank_bound, BoundFns};
pub use check::{CheckReport, Finding, Strictness};
pub use fuzz::{fuzz_run, replay, FuzzConfig, FuzzFailure, FuzzSummary, MethodStats, OpWeights};
pub use oracle::OracleHeap;
