//! Inner and outer interval approximations of quantified reachable sets.
//!
//! A quantified reachable set is the set of outputs `z` such that
//! `∀p1 ∃p2 ∀p3 ... z = f(p)` over box domains. This crate computes a
//! guaranteed inner interval (every point is in the set) and a guaranteed
//! outer interval (the set is inside it) for scalar and vector outputs,
//! plus a sampling estimate used to judge tightness.

pub mod estimate;
pub mod expr;
pub mod interval;
pub mod problem;
pub mod scalar;
pub mod vector;

pub use interval::{Interval, IntervalBox, IntervalError, Range};
