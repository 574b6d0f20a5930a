//! Numerical laboratory for the graphical mean curvature flow of entire
//! maps `f: R^m -> R^n` (codimension-two focus, `n = 2`).
//!
//! The crate evolves non-parametric mean curvature flow and its normalized
//! version on a truncated uniform grid, monitors the quantities that the
//! area-decreasing theory predicts to be controlled along the flow, builds
//! certified initial data, and searches for self-expanding solutions.
//!
//! Everything is deterministic: fixed stencils, fixed reduction order, and
//! data-parallel fills over disjoint chunks, so results are bit-identical
//! across runs and worker counts.

pub mod config;
pub mod expander;
pub mod geometry;
pub mod grid;
pub mod flow;
pub mod initialdata;
pub mod invariants;
pub mod linalg;
pub mod parallel;
pub mod run;
pub mod snapshot;
