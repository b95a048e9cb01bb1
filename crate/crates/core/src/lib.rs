//! Decomposition methods for two-block mixed-integer linear programs
//!
//! ```text
//! min cᵀx + gᵀz   s.t.   Ax + Bz = 0,  x ∈ X,  z ∈ Z
//! ```
//!
//! with `X` and `Z` bounded mixed-integer sets. Two solvers are provided:
//! an ℓ1 augmented Lagrangian method whose relaxations are solved by
//! reverse-norm cuts ([`alm`], built on [`ausal`] and [`lipmin`]) and a
//! single-loop ADMM scheme driven by augmented Lagrangian cuts ([`admm`]).
//! Subproblems go through [`subsolver`], which bundles a small
//! branch-and-bound code. [`reference`] holds brute-force oracles and
//! [`instances`] the test problem generators.

pub mod error;
pub mod model;
pub mod subsolver;
pub mod cuts;
pub mod lipmin;
pub mod ausal;
pub mod alm;
pub mod admm;
pub mod instances;
pub mod reference;
pub mod report;
pub mod tables;

pub use error::{Error, Result};
