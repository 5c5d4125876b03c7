//! Proximal operators, envelope functions and splitting algorithms for
//! composite objectives `l(x) + φ(x)`.
//!
//! The crate is `no_std` and only needs an allocator. All arithmetic is in
//! `f64`; vectors are plain slices and `Vec<f64>`, matrices are row-major
//! [`DenseMatrix`](linalg::DenseMatrix) values.
//!
//! Module map:
//!
//! * [`linalg`]: dense matrices, Cholesky, power iteration, scalar root
//!   finding and finite differences.
//! * [`prox`]: soft thresholding, quadratic and bridge (`|t|^q`) proxes,
//!   the scalar prox catalog, Moreau envelope and decomposition.
//! * [`models`]: losses, composite penalties, Bregman divergences and
//!   half-quadratic weight rows.
//! * [`envelope`]: forward-backward, Douglas-Rachford and D-Moreau envelopes.
//! * [`solvers`]: proximal point, proximal gradient, FISTA, backtracking,
//!   proximal Newton, Douglas-Rachford and cyclic descent for bridge
//!   penalties.
//! * [`splitting`]: dual ascent, augmented Lagrangian, Bregman iteration,
//!   ADMM (plain and linearized), divide and concur, primal-dual composite
//!   iteration, dual forward-backward, Picard-Opial and half-quadratic IRLS.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod envelope;
pub mod error;
pub mod linalg;
pub mod models;
pub mod prox;
pub mod solvers;
pub mod splitting;

mod rng;

pub use error::{Error, Result};
