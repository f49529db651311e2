//! Numerical laboratory for degenerate and singular anisotropic variational
//! problems `div(B'(H(∇u))∇H(∇u)) + F'(u) = 0`.
//!
//! The crate provides anisotropic norms with derivative access, their duals
//! and Wulff shapes, checkers for the structural conditions on `H` and `B`,
//! an explicit planar construction of norms satisfying the sign condition,
//! the `B_ε` regularization, and a grid solver with rescaled-energy and
//! Liouville-mass diagnostics. Runnable tours live in `examples/`:
//!
//! ```text
//! cargo run --release --example norms_and_euler
//! cargo run --release --example dual_and_wulff
//! cargo run --release --example condition_checks
//! cargo run --release --example glued_pq_gallery
//! cargo run --release --example planar_constructor
//! cargo run --release --example regularization
//! cargo run --release --example allen_cahn_monotonicity
//! cargo run --release --example liouville
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod sampling;
pub mod norm;
pub mod duality;
pub mod conditions;
pub mod planar;
pub mod regularization;
pub mod pde;
pub mod cli;

pub use error::{Error, Result};
