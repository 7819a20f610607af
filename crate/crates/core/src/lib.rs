//! Numerical laboratory for a trait-structured Fisher-KPP equation with
//! nonlocal competition,
//!
//! ```text
//! u_t - u_xx - u_yy + alpha g(y) u = (1 - ∫ K(z) u(t, x, z) dz) u,
//! ```
//!
//! covering the spectrum of the trait operator, steady states and traveling
//! fronts, simulation of the Cauchy problem and front-speed measurement.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod spectral;
pub mod stats;
pub mod tracker;
pub mod wavefront;

pub use error::{Error, Result};
pub use field::Field2;
pub use grid::{SpaceGrid, TraitGrid, UniformGrid};
