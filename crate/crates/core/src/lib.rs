//! Two-agent optimization over private feasible sets.
//!
//! A client holding feasible set `P_1` finds the optimizers of a public
//! objective over `P_1 ∩ P_2`, where `P_2` is held by a server replicated
//! across `N2` non-colluding databases. The client walks its own value groups
//! from best to worst and uses symmetric PIR queries to learn only how many
//! members of each group the server shares (CarPSI), then which ones
//! (FindPSI), stopping at the first non-empty group.
//!
//! Modules:
//! - [`field`]: prime-field arithmetic and vectors.
//! - [`model`]: alphabet, feasible sets, objective, rank partition, oracles.
//! - [`protocol`]: databases, round scheduler, CarPSI/FindPSI, the
//!   optimizer, threshold PSI and the naive PSI baseline.
//! - [`analytics`]: closed-form costs, the probability that the scheme costs
//!   as much as naive PSI, and exact leakage accounting.
//! - [`harness`]: deterministic end-to-end runs and parameter sweeps.

pub mod analytics;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod harness;
pub mod model;
pub mod protocol;

pub use error::{Error, Result};
