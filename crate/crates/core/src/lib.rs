//! Exact computations around formal connections with quadratic poles.
//!
//! The crate is `no_std` with `alloc`. Everything is exact: rationals,
//! simple algebraic extensions of the rationals, and finite fields.
//!
//! Layout:
//! - [`algebra`]: fields, polynomials, matrices, truncated series.
//! - [`connection`]: formal connections, gauge action, elementary splitting.
//! - [`pcurvature`]: p-th powers of derivations, p-curvature, bigraded checks.
//! - [`quantum`]: quantum cohomology tables and their connections.
//! - [`steenrod`]: Frobenius p-linear actions and the theorem checks built on them.
//! - [`regularity`]: cyclic vectors, Newton polygons, certificates.
//! - [`mf`]: potentials, Milnor rings and twisted de Rham cohomology.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod connection;
mod error;
pub mod mf;
pub mod pcurvature;
pub mod quantum;
pub mod regularity;
pub mod steenrod;

pub use error::{Error, Result};
