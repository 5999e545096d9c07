//! Core library for tuning algorithm parameters as expressions of
//! problem-instance features.
//!
//! Instead of searching for a single constant parameter value, the tuner
//! evolves small arithmetic expressions (e.g. `2/n`) that map instance
//! features such as the bit count `n` to a parameter value, so one tuning
//! run yields a configuration rule that scales across instance sizes.
//!
//! The crate is organised around the tuning pipeline:
//!
//! - [`expr`] — arithmetic expression trees: parsing, evaluation, genetic
//!   variation, and canonical forms.
//! - [`problems`] — pseudo-Boolean benchmark problems (OneMax, BinValue,
//!   LeadingOnes, Jump) with feature extraction and built-in training sets.
//! - [`solvers`] — fixed-budget stochastic target algorithms: the (1+1) EA
//!   with standard bit mutation and RLS with fixed mutation strength.
//! - [`stats`] — the rank-sum test backing replacement decisions.
//! - [`engine`] — the genetic-programming tuning loop with statistically
//!   gated replacement and tree-size bloat control.
//! - [`harness`] — the multi-run training protocol, expression evaluation
//!   tables, and baseline expression families.
//!
//! Everything here is deterministic given explicit random streams and does
//! no IO; the crate is `no_std` (with `alloc`). The companion CLI crate
//! adds configuration files, report serialization, and parallel execution.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod engine;
pub mod expr;
pub mod harness;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod stats;

pub use engine::{Candidate, Population, ReferenceTable, TunerConfig};
pub use expr::{Dialect, Expr, FeatureEnv};
pub use problems::{Bitstring, ProblemInstance, ProblemKind};
pub use rng::RandomStream;
pub use solvers::{RunResult, SolverKind};
