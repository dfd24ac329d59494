//! Claims-problem rules engine with empirical axiom audits.
//!
//! A claims problem divides an endowment among claimants whose demands may
//! exceed it. This crate bundles:
//!
//! - [`core`]: problem/weight/award types, the three-equation rule contract,
//!   and the monotone cap-balancing solver shared by every separable
//!   directional rule;
//! - [`rules`]: the rule catalog (weighted constrained equal awards and its
//!   power-law family, proportional division, two literal three-claimant
//!   constructions, a feasibility repair, and a patched rule driven by an
//!   independent weight set);
//! - [`axioms`]: falsifier-style checkers for homogeneity, claims
//!   monotonicity, anonymity, strategy-freedom and its continuous variant,
//!   plus guarantee-level (alpha) bracket estimation;
//! - [`badpairs`]: the incompatibility calculus on weight pairs, with
//!   constructive impossibility witnesses, common-membership search, and
//!   greedy independent-set machinery;
//! - [`market`]: a supplier-retailer Cournot model that measures
//!   order-inflation incentives under any catalog rule.
//!
//! All checkers are deterministic given a seed; "pass" always means "no
//! violation found at the configured budget".

pub mod axioms;
pub mod badpairs;
pub mod core;
pub mod market;
pub mod rules;
pub mod sampling;

mod error;

pub use error::{Error, Result};
