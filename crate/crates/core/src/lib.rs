//! Price formation with transaction costs, solved through its reduction to
//! the heat equation with nonlocal boundary coupling.
//!
//! The signed density `f` of buy and sell orders on `[-L, L]` is mapped by
//! [`transform::forward_transform`] to a heat profile `F`; `F` is evolved
//! either by the eigenfunction series in [`spectral`] or by the
//! finite-difference scheme in [`fd`]; the free boundary `p(t)` is the
//! zero of `F` ([`free_boundary`]) and [`analysis`] covers the conserved
//! masses, the steady state and the admissibility of the mass ratio.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod error;
pub mod fd;
pub mod free_boundary;
pub mod grid;
pub mod model;
pub mod quadrature;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{Grid, SampledProfile};
pub use model::{CompatibleInitialDatum, DatumFamily, ModelParams};
