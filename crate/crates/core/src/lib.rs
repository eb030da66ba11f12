//! Probing strategies for stochastic combinatorial optimization.
//!
//! Inputs are known only as finite discrete distributions; paying a
//! per-input probe cost reveals an exact value. A strategy chooses what to
//! probe under a budget, then commits to a solution before the remaining
//! inputs realize. This crate implements non-adaptive strategies (the probe
//! set is fixed upfront) built on the outlier reduction — pick the set to
//! probe by asking which inputs are cheapest to *ignore* — for four
//! objectives, plus exact brute-force oracles for measuring how much
//! adaptivity could have helped on small instances.
//!
//! - [`wct`]: weighted completion time on one machine (Smith's rule).
//! - [`makespan`]: identical machines (effective sizes + Graham's rule).
//! - [`kmedian`], [`steiner`]: metric objectives over distributional nodes,
//!   via the expected-distance metric in [`metric`].
//! - [`oracle`]: exhaustive non-adaptive, hard-budget adaptive (decision
//!   tree), soft-budget Lagrangian bound, and exact outlier optima.
//! - [`gap`]: the arbitrary-centers construction where adaptivity is
//!   essential, with its scripted adaptive policy.

pub mod dist;
pub mod eval;
pub mod gap;
pub mod kmedian;
pub mod lp;
pub mod makespan;
pub mod metric;
pub mod oracle;
pub mod steiner;
pub mod wct;

mod error;
pub use error::{Error, Result};
